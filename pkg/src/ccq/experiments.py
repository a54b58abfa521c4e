"""Separation experiments between restricted and unrestricted min-entropy."""
import configparser
import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import circuits as cq
from .channels import ChoiSet, generate_choi_set
from .config import TOL
from .densemath import Ket, ValidationError, permute_subsystems
from .divergences import EntropyReport, InvariantViolation, comp_hmin, comp_hmin_pure
from .ensembles import ghse_sample, haar_pure, haar_subsystem
from .refentropy import conditional_entropy, hmin_pure, hmin_sdp, von_neumann
from .rng import SeededRng


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    ensemble: str = "haar_pure"
    n_A: int = 1
    n_B: int = 1
    m: int = 1
    k: int = 1
    k_values: list = field(default_factory=list)
    samples: int = 10
    seed: int = 0
    gateset: str = "clifford_hsc"
    custom_gates: dict = field(default_factory=dict)
    G: int = 1
    a_max: int = 0
    epsilon: float = 0.3
    slack: float = 0.0
    reference_channels: bool = False
    output_subsets: bool = False
    family: str = "pure"

    def validate(self):
        if self.ensemble not in ("haar_pure", "haar_subsystem", "ghse"):
            raise ConfigError(f"unknown ensemble {self.ensemble!r}")
        for name in ("n_A", "n_B", "k", "samples"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.m < 0:
            raise ConfigError("m must be non-negative")
        if self.family not in ("pure", "mixed"):
            raise ConfigError(f"unknown family {self.family!r}")
        try:
            self.gate_set()
            self.budget(self.n_B)
        except (cq.GateSetError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        return self

    def gate_set(self):
        return cq.gate_set(self.gateset, self.custom_gates)

    def budget(self, n_in):
        return cq.EnumerationBudget(self.G, n_in, self.a_max)

    @classmethod
    def from_text(cls, text):
        parser = configparser.ConfigParser()
        parser.optionxform = str
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        cfg = cls()
        types = {f: type(getattr(cfg, f)) for f in cfg.__dataclass_fields__}
        for section in parser.sections():
            if section == "gateset.custom":
                cfg.custom_gates = dict(parser.items(section))
                continue
            if section not in ("experiment", "budget", "ensemble", "output"):
                raise ConfigError(f"unknown config section [{section}]")
            for key, raw in parser.items(section):
                if key not in types:
                    raise ConfigError(f"unknown config key {key!r}")
                setattr(cfg, key, _coerce(raw, types[key], key))
        return cfg.validate()

    @classmethod
    def from_file(cls, path):
        try:
            with open(path) as fh:
                return cls.from_text(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _coerce(raw, typ, key):
    raw = raw.strip()
    try:
        if typ is bool:
            if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return raw.lower() in ("true", "1", "yes")
        if typ is list:
            return [int(x) for x in raw.replace(",", " ").split()]
        if typ is dict:
            raise ValueError("use a [gateset.custom] section")
        return typ(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


@dataclass
class GapRecord:
    state_id: str
    informational: float
    computational: float
    gap: float
    witness: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.gap < -TOL.gap_slack:
            raise InvariantViolation(f"negative gap {self.gap} for {self.state_id}")

    def to_json(self):
        return json.dumps(jsonable(asdict(self)), sort_keys=True)


def jsonable(x):
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    return x


def copies_ket(v, d_A, d_B, k):
    """psi^{(x) k} ordered as A1..Ak B1..Bk."""
    out = np.ones(1, dtype=np.complex128)
    for _ in range(k):
        out = np.kron(out, v)
    order = tuple(range(0, 2 * k, 2)) + tuple(range(1, 2 * k, 2))
    return permute_subsystems(out, (d_A, d_B) * k, order)


def copies_density(m, d_A, d_B, k):
    """rho^{(x) k} ordered as A1..Ak B1..Bk."""
    out = np.ones((1, 1), dtype=np.complex128)
    for _ in range(k):
        out = np.kron(out, m)
    order = tuple(range(0, 2 * k, 2)) + tuple(range(1, 2 * k, 2))
    return permute_subsystems(out, (d_A, d_B) * k, order)


def choi_set_for(cfg, k):
    d_A, d_B = 2 ** (k * cfg.n_A), 2 ** (k * cfg.n_B)
    if d_A * d_B > TOL.max_comp_dim:
        raise ConfigError(f"k={k} copies exceed the computational dimension cap")
    gs = cfg.gate_set()
    return generate_choi_set(gs, cfg.budget(k * cfg.n_B), d_A, d_B,
                             output_subsets=cfg.output_subsets,
                             reference_channels=cfg.reference_channels)


def _check_reference(cfg, comp, k):
    if cfg.reference_channels and comp > k * cfg.n_A + 1e-9:
        raise InvariantViolation("computational min-entropy above log d_A with the mixing channel present")


def run_separation_pure(cfg, k=None, cs=None):
    """Records for pure states: k H_min(A|B) versus the restricted value on B^k."""
    k = cfg.k if k is None else k
    if cfg.ensemble == "ghse":
        raise ConfigError("pure separation needs haar_pure or haar_subsystem")
    rng = SeededRng(cfg.seed)
    cs = cs or choi_set_for(cfg, k)
    d_A, d_B = 2**cfg.n_A, 2**cfg.n_B
    n = cfg.n_A + cfg.n_B
    records = []
    for s in range(cfg.samples):
        if cfg.ensemble == "haar_pure":
            v = haar_pure(2**n, rng, s)
        else:
            v = haar_subsystem(n, cfg.m, rng, s)
        h1 = hmin_pure(Ket(v, (d_A, d_B)))
        info = k * h1
        rep = comp_hmin_pure(copies_ket(v, d_A, d_B, k), cs, info)
        diag = {"k": k, "generators": len(cs), "hmin_single": h1}
        if cfg.ensemble == "haar_subsystem" and h1 < -cfg.m - 1e-9:
            raise InvariantViolation(f"H_min {h1} below -m for a subsystem-Haar state")
        if cfg.n_A == 1 and cfg.n_B == 1 and k <= 5:
            from .schurweyl import concentrate_overlap

            res = concentrate_overlap(v, k)
            diag["concentration_achieved"] = -math.log2(2**k * res.overlap)
            diag["concentration_achieved_tp"] = -math.log2(2**k * res.overlap_tp)
            if info > diag["concentration_achieved_tp"] + TOL.gap_slack:
                raise InvariantViolation("trace-preserving concentration beats H_min")
        _check_reference(cfg, rep.computational, k)
        records.append(GapRecord(f"{cfg.ensemble}-{cfg.seed}-{s}", info, rep.computational,
                                 rep.gap, cs.label(rep.witness[0]), diag))
    return records


def run_separation_mixed(cfg, k=None, cs=None):
    """Records for GHSE states: k H_min(A|B) (SDP) versus the restricted value on rho^{(x) k}."""
    k = cfg.k if k is None else k
    if cfg.ensemble != "ghse":
        raise ConfigError("mixed separation needs the ghse ensemble")
    rng = SeededRng(cfg.seed)
    cs = cs or choi_set_for(cfg, k)
    d_A, d_B = 2**cfg.n_A, 2**cfg.n_B
    if d_A * d_B > TOL.max_sdp_dim:
        raise ConfigError("SDP reference limited to d_A d_B <= 256")
    records = []
    for s in range(cfg.samples):
        rho = ghse_sample(cfg.n_A + cfg.n_B, cfg.m, rng, s)
        sol = hmin_sdp(rho, (d_A, d_B))
        h1 = sol.hmin
        h_cond = conditional_entropy(rho, (d_A, d_B))
        if h1 > h_cond + TOL.gap_slack:
            raise InvariantViolation("H_min above the conditional von Neumann entropy")
        info = k * h1
        rep = comp_hmin(copies_density(rho, d_A, d_B, k), cs, rng, info)
        _check_reference(cfg, rep.computational, k)
        diag = {
            "k": k,
            "generators": len(cs),
            "hmin_single": h1,
            "sdp_gap": sol.gap,
            "sdp_iterations": sol.iterations,
            "h_cond": h_cond,
            "h_joint": von_neumann(rho),
        }
        records.append(GapRecord(f"ghse-{cfg.seed}-{s}", info, rep.computational, rep.gap,
                                 cs.label(rep.witness[0]), diag))
    return records


def summarize(records, cfg, k=None):
    k = cfg.k if k is None else k
    if not records:
        return {"samples": 0}
    info = np.array([r.informational for r in records])
    comp = np.array([r.computational for r in records])
    gap = comp - info
    out = {
        "samples": len(records),
        "k": k,
        "mean_informational": float(info.mean()),
        "mean_computational": float(comp.mean()),
        "mean_gap": float(gap.mean()),
        "min_gap": float(gap.min()),
        "max_gap": float(gap.max()),
        "frac_computational_high": float(np.mean(comp >= k * cfg.n_A - cfg.epsilon)),
        "frac_informational_low": float(np.mean(info <= -k * (cfg.n_A - cfg.m) + cfg.slack)),
    }
    return out


GAP_COLUMNS = ["family", "k", "samples", "mean_informational", "mean_computational",
               "mean_gap", "gap_p10", "gap_p90"]


def run_gap_report(cfg):
    """Columnar summary over ``cfg.k_values``; an empty sweep yields only the header."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(GAP_COLUMNS)
    runner = run_separation_mixed if cfg.family == "mixed" else run_separation_pure
    for k in cfg.k_values:
        recs = runner(cfg, k)
        info = np.array([r.informational for r in recs])
        comp = np.array([r.computational for r in recs])
        gap = comp - info
        writer.writerow([cfg.family, k, len(recs), repr(float(info.mean())), repr(float(comp.mean())),
                         repr(float(gap.mean())), repr(float(np.percentile(gap, 10))),
                         repr(float(np.percentile(gap, 90)))])
    return buf.getvalue()


def records_csv(records):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["state_id", "informational", "computational", "gap", "witness"])
    for r in records:
        writer.writerow([r.state_id, repr(r.informational), repr(r.computational), repr(r.gap), r.witness])
    return buf.getvalue()
