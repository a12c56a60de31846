"""Parameter sweeps through the closed-form pipeline, figure presets and I/O.

A sweep evaluates every point of a 1-D or 2-D linear grid independently;
results are collected in grid order (first axis outermost) no matter how many
worker processes are used, and floats are written with ``.17g`` so the CSV
output is byte-reproducible.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import (
    ApproxInvalid,
    ConfigError,
    DegenerateKernel,
    DegenerateM,
    NoResonance,
    TruncationCapExceeded,
    UnknownFigure,
    Unstable,
)
from .model import SystemParams, ValidityWarning, detuning_for_resonance, dressed_frame, thermal_occupation
from .moments import (
    quadrature_variance,
    stability_check,
    steady_moments,
    steady_moments_two_mode,
    two_mode_variance,
    variance_approx,
)
from .reduced import coefficients_approx, coefficients_exact, reduced_generator_single
from .spinsolver import spin_steady_closed

SCHEMA_VERSION = 1
WORKERS_ENV = "NVSQUEEZE_WORKERS"
OUTDIR_ENV = "NVSQUEEZE_OUTDIR"

SWEEPABLE = ("omega0", "omega1", "delta", "g", "phi", "n_th", "gamma_m", "Gamma0", "Gamma1")

# output name -> CSV columns it produces
OUTPUT_COLUMNS = {
    "n_ss": ("n_ss",),
    "pair_ss": ("pair_ss_re", "pair_ss_im", "pair_ss_abs"),
    "var_x": ("var_x",),
    "var_x_minus_quarter": ("var_x_minus_quarter",),
    "squeezing_db": ("squeezing_db",),
    "a_minus": ("a_minus",),
    "a_plus": ("a_plus",),
    "delta_shift": ("delta_shift",),
    "s1": ("s1_re", "s1_im", "s1_abs"),
    "s2": ("s2_re", "s2_im", "s2_abs"),
    "omega_ab": ("omega_ab",),
    "stability": ("stable",),
    "two_mode": ("sum_occupancy", "sum_pair_re", "sum_pair_im", "sum_pair_abs", "var_u"),
    "var_x_approx": ("var_x_approx",),
}
ORACLE_COLUMNS = ("oracle_n_err", "oracle_pair_err")


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    count: int

    def __post_init__(self):
        if self.name not in SWEEPABLE:
            raise ConfigError(f"cannot sweep {self.name!r}; choose from {SWEEPABLE}")
        if int(self.count) != self.count or self.count < 2:
            raise ConfigError(f"axis {self.name}: count must be an integer >= 2")
        if not self.max > self.min:
            raise ConfigError(f"axis {self.name}: grid must be strictly increasing")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.min, self.max, int(self.count))


@dataclass(frozen=True)
class SweepSpec:
    base: SystemParams = field(default_factory=SystemParams)
    axes: tuple[Axis, ...] = ()
    resonance_lock: bool = True
    outputs: tuple[str, ...] = ("n_ss", "var_x")
    validate_with_oracle: bool = False
    oracle_stride: int = 10

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 2:
            raise ConfigError("a sweep needs one or two axes")
        if len({a.name for a in self.axes}) != len(self.axes):
            raise ConfigError("axes must be distinct parameters")
        unknown = [o for o in self.outputs if o not in OUTPUT_COLUMNS]
        if unknown:
            raise ConfigError(f"unknown outputs {unknown}; choose from {sorted(OUTPUT_COLUMNS)}")
        if self.oracle_stride < 1:
            raise ConfigError("oracle_stride must be >= 1")

    @property
    def columns(self) -> list[str]:
        cols = [a.name for a in self.axes] + ["delta"]
        for o in self.outputs:
            cols += OUTPUT_COLUMNS[o]
        if self.validate_with_oracle:
            cols += ORACLE_COLUMNS
        return cols + ["status"]

    def points(self) -> list[dict]:
        grids = [a.values for a in self.axes]
        if len(grids) == 1:
            return [{self.axes[0].name: float(x)} for x in grids[0]]
        return [
            {self.axes[0].name: float(x), self.axes[1].name: float(y)}
            for x in grids[0]
            for y in grids[1]
        ]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "base": asdict(self.base),
            "axes": [asdict(a) for a in self.axes],
            "resonance_lock": self.resonance_lock,
            "outputs": list(self.outputs),
            "validate_with_oracle": self.validate_with_oracle,
            "oracle_stride": self.oracle_stride,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> SweepSpec:
        try:
            version = doc.get("schema_version")
            if version != SCHEMA_VERSION:
                raise ConfigError(f"unsupported schema_version {version!r}")
            base = params_from_dict(doc.get("base", {}))
            axes = tuple(Axis(**a) for a in doc["axes"])
            return cls(
                base=base,
                axes=axes,
                resonance_lock=bool(doc.get("resonance_lock", True)),
                outputs=tuple(doc.get("outputs", ("n_ss", "var_x"))),
                validate_with_oracle=bool(doc.get("validate_with_oracle", False)),
                oracle_stride=int(doc.get("oracle_stride", 10)),
            )
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed sweep config: {exc}") from exc


_RATE_FIELDS = ("delta", "omega0", "omega1", "g", "gamma_m", "Gamma0", "Gamma1")


def params_from_dict(doc: dict) -> SystemParams:
    """Build :class:`SystemParams` from a config mapping.

    With ``"units": "si"`` every frequency/rate (including ``omega_m``) is an
    angular frequency in rad/s and is rescaled by ``omega_m``; ``n_th`` may
    then be replaced by ``"temperature_K"``.
    """
    doc = dict(doc)
    units = str(doc.pop("units", "scaled")).lower()
    if units not in ("scaled", "si"):
        raise ConfigError(f"units must be 'scaled' or 'si', got {units!r}")
    temperature = doc.pop("temperature_K", None)
    known = {f.name for f in fields(SystemParams)}
    extra = set(doc) - known
    if extra:
        raise ConfigError(f"unknown parameter(s) {sorted(extra)}")
    try:
        vals = {k: float(v) for k, v in doc.items()}
        if units == "si":
            wm = vals.pop("omega_m", None)
            if wm is None:
                raise ConfigError("SI configs must give omega_m in rad/s")
            vals = {k: (v / wm if k in _RATE_FIELDS else v) for k, v in vals.items()}
            if temperature is not None:
                vals["n_th"] = thermal_occupation(float(temperature), wm)
        elif temperature is not None:
            raise ConfigError("temperature_K is only accepted with units = 'si'")
        return SystemParams(**vals)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


@dataclass
class SweepRow:
    coords: dict
    values: dict
    status: str


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[SweepRow]

    def column(self, name: str) -> np.ndarray:
        """Column as a float array (missing values are NaN)."""
        out = []
        for r in self.rows:
            v = r.coords.get(name, r.values.get(name))
            out.append(np.nan if v is None else float(v))
        return np.array(out)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = self.spec.columns
        w.writerow(cols)
        for r in self.rows:
            merged = {**r.coords, **r.values, "status": r.status}
            w.writerow([_fmt(merged.get(c)) for c in cols])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "spec": self.spec.to_dict(),
            "columns": self.spec.columns,
            "rows": [{**r.coords, **r.values, "status": r.status} for r in self.rows],
        }
        return json.dumps(doc, indent=1, default=_json_default)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_default(v):
    if isinstance(v, np.generic):
        return v.item()
    raise TypeError(type(v))


def _split(prefix, z, out):
    out[f"{prefix}_re"], out[f"{prefix}_im"], out[f"{prefix}_abs"] = z.real, z.imag, abs(z)


def _oracle(c, p) -> tuple[float, float, bool]:
    """Fock-space check of the closed-form moments; returns errors and escalation flag."""
    from .lindblad import HilbertSpace, assemble, mechanical_moments, steady_state_adaptive

    start = HilbertSpace(1, (16,), cap=256)
    gen = reduced_generator_single(c, p.gamma_m, p.n_th)
    rho, space = steady_state_adaptive(lambda s: assemble(s, gen), start)
    n_f, m_f, _ = mechanical_moments(rho, space)
    n, m = steady_moments(c, p.gamma_m, p.n_th)
    return abs(n_f - n), abs(m_f - m), space.fock_dims != start.fock_dims


def evaluate_point(p: SystemParams, outputs, resonance_lock: bool = True, oracle: bool = False) -> tuple[dict, str]:
    """All requested outputs at one parameter point, plus a status string."""
    vals: dict = {c: None for o in outputs for c in OUTPUT_COLUMNS[o]}
    if oracle:
        vals.update({c: None for c in ORACLE_COLUMNS})
    if resonance_lock:
        try:
            p = p.replace(delta=detuning_for_resonance(p.omega_m, p.omega0, p.omega1))
        except NoResonance:
            vals["delta"] = None
            return vals, "no-resonance"
    vals["delta"] = p.delta
    frame = dressed_frame(p)
    if "omega_ab" in outputs:
        vals["omega_ab"] = frame.omega_ab
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ValidityWarning)
        try:
            c = coefficients_exact(frame, spin_steady_closed(p), p.Gamma1)
        except DegenerateM:
            return vals, "degenerate"
    vals.update(a_minus=c.a_minus, a_plus=c.a_plus, delta_shift=c.delta_shift)
    for name in ("s1", "s2"):
        if name in outputs:
            _split(name, getattr(c, name), vals)
    for k in ("a_minus", "a_plus", "delta_shift"):
        if k not in outputs:
            vals.pop(k)
    stable, _ = stability_check(c, p.gamma_m)
    if "stability" in outputs:
        vals["stable"] = stable
    status = "ok"
    if "var_x_approx" in outputs:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ValidityWarning)
                approx = coefficients_approx(frame, p.Gamma0, p.g)
            vals["var_x_approx"] = variance_approx(frame, approx, p.gamma_m, p.n_th)
        except ApproxInvalid:
            status = "approx-invalid"
    if not stable:
        return vals, "unstable"
    try:
        n, m = steady_moments(c, p.gamma_m, p.n_th)
    except Unstable:
        return vals, "unstable"
    rep = quadrature_variance(n, m)
    steady = {
        "n_ss": n,
        "var_x": rep.var_x,
        "var_x_minus_quarter": rep.var_x - 0.25,
        "squeezing_db": rep.squeezing_db,
    }
    _split("pair_ss", m, steady)
    if "two_mode" in outputs:
        occ, pair = steady_moments_two_mode(c, p.gamma_m, p.n_th)
        steady["sum_occupancy"] = occ
        _split("sum_pair", pair, steady)
        steady["var_u"] = two_mode_variance(occ, pair)
    for k, v in steady.items():
        if k in vals:
            vals[k] = v
    if oracle:
        try:
            en, em, escalated = _oracle(c, p)
            vals["oracle_n_err"], vals["oracle_pair_err"] = en, em
            if escalated:
                status = "truncation-escalated"
        except (TruncationCapExceeded, DegenerateKernel):
            status = "truncation-cap"
    return vals, status


def _task(args):
    base, coords, outputs, lock, oracle = args
    vals, status = evaluate_point(base.replace(**coords), outputs, lock, oracle)
    return vals, status


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from exc
    return os.cpu_count() or 1


def run_sweep(spec: SweepSpec, workers: int | None = None) -> SweepResult:
    """Evaluate ``spec`` on its grid; rows are returned in grid order."""
    workers = default_workers() if workers is None else max(1, int(workers))
    pts = spec.points()
    tasks = [
        (spec.base, pt, spec.outputs, spec.resonance_lock,
         spec.validate_with_oracle and i % spec.oracle_stride == 0)
        for i, pt in enumerate(pts)
    ]
    try:
        for pt in pts:
            spec.base.replace(**pt)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if workers == 1 or len(tasks) < 64:
        results = [_task(t) for t in tasks]
    else:
        chunk = math.ceil(len(tasks) / (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_task, tasks, chunksize=chunk))
    rows = [SweepRow(pt, vals, status) for pt, (vals, status) in zip(pts, results)]
    return SweepResult(spec, rows)


# -- figure presets -----------------------------------------------------------
# Axis ranges are read off the published plot axes; heatmaps use 81 x 81.

_O0 = dict(name="omega0", min=0.01, max=1.4)
_FIGURES = {
    "fig4": ((dict(_O0, count=140),), {}, ("n_ss",)),
    "fig5": ((dict(_O0, count=140),), {}, ("var_x",)),
    "fig6": ((dict(_O0, count=140),), {}, ("a_minus", "a_plus")),
    "fig7": (
        (dict(_O0, count=81), dict(name="omega1", min=-0.9, max=0.5, count=81)),
        {},
        ("var_x_minus_quarter", "n_ss", "stability"),
    ),
    "fig8": (
        (dict(_O0, count=81), dict(name="n_th", min=1e2, max=1e4, count=81)),
        {"omega1": -0.7},
        ("var_x_minus_quarter", "n_ss", "stability"),
    ),
    "fig9": (
        (dict(_O0, count=81), dict(name="g", min=0.01, max=0.1, count=81)),
        {"omega1": -0.7},
        ("var_x_minus_quarter", "n_ss", "stability"),
    ),
    "fig10": (
        (dict(_O0, count=81), dict(name="omega1", min=-0.9, max=0.5, count=81)),
        {},
        ("omega_ab",),
    ),
}
FIGURES = tuple(_FIGURES)


def caption_params(**changes) -> SystemParams:
    """Shared caption parameters: Q = 1e6, n_th = 1e3, Gamma0 = Gamma1 = 0.25, g = 0.06."""
    return SystemParams(
        omega_m=1.0, gamma_m=1e-6, n_th=1e3, Gamma0=0.25, Gamma1=0.25, g=0.06, omega1=0.0
    ).replace(**changes)


def figure_presets(name: str) -> SweepSpec:
    if name not in _FIGURES:
        raise UnknownFigure(f"no preset named {name!r}; choose from {FIGURES}")
    axes, base, outputs = _FIGURES[name]
    return SweepSpec(
        base=caption_params(**base),
        axes=tuple(Axis(**a) for a in axes),
        resonance_lock=True,
        outputs=outputs,
    )


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be an object")
    return doc
