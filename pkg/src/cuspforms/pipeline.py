"""Batch driver: elliptic bump -> Fourier transform -> Lie cusp check -> scale -> lift -> group checks."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import CuspViolation, ReductionMismatch
from .gln import companion_elliptic, default_torus_poly, elliptic_bump, standard_parabolics
from .group import (
    MODELS,
    bch_defect_check,
    group_cusp_verify,
    jacquet_vanishing_check,
    lambda_threshold,
    lift_to_group,
    required_precision,
    support_level,
    window_constants,
)
from .lattice import fourier_separable, fourier_transform, lie_cusp_verify, scale_function
from .padic import ResiduePolynomial, ScaledMatrix, ScaledResidue, irreducible_over_residue_field, is_prime

SCHEMA_VERSION = "1.0"
CHECKS = ("lie", "group", "bch", "ft", "all")
MAX_WINDOW_POINTS = 2_000_000  # dense arrays are enumerated point by point
FORMATS = ("json", "text")


@dataclass
class PipelineConfig:
    p: int = 3
    n: int = 2
    model: str = "exp"
    poly: list[int] | None = None
    depth: int = 1
    window_pad: int = 0
    val_lambda: int | None = None
    precision: int | None = None
    seed: int = 0
    check: str = "all"
    report: str = "json"
    outside_samples: int = 50
    conjugations: int = 100
    bch_samples: int = 200
    timings: bool = False

    # -- derived constants --------------------------------------------------

    @property
    def torus_poly(self) -> ResiduePolynomial:
        if self.poly is None:
            return default_torus_poly(self.p, self.n)
        c = list(self.poly)
        if len(c) == self.n:
            c.append(1)
        return ResiduePolynomial(self.p, 1, tuple(c))

    @property
    def constants(self) -> tuple[int, int]:
        """(n0, n1) of the transformed bump, whose window is (-depth, window_pad)."""
        return max(0, self.window_pad), self.depth

    @property
    def threshold(self) -> int:
        n0, n1 = self.constants
        return lambda_threshold(n0, n1)

    @property
    def effective_val_lambda(self) -> int:
        return self.threshold if self.val_lambda is None else self.val_lambda

    @property
    def levels(self) -> tuple[int, int]:
        """(n, m): support and invariance levels of the lifted function."""
        v = self.effective_val_lambda
        return support_level(v, self.depth), self.window_pad + v

    @property
    def effective_precision(self) -> int:
        if self.precision is not None:
            return self.precision
        return max(required_precision(*self.levels), 6)

    def validate(self) -> None:
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}")
        if self.model == "exp" and self.p < 3:
            raise ValueError("the exp model needs p >= 3; use --model id-plus-x for p = 2")
        if self.check not in CHECKS:
            raise ValueError(f"check must be one of {CHECKS}")
        if self.report not in FORMATS:
            raise ValueError(f"report must be one of {FORMATS}")
        if self.depth < 1:
            raise ValueError("bump depth must be >= 1")
        if self.window_pad < 0:
            raise ValueError("window_pad must be >= 0")
        f = self.torus_poly
        if f.degree != self.n or not f.is_monic:
            raise ValueError(f"torus polynomial must be monic of degree {self.n}")
        if not irreducible_over_residue_field(f):
            raise ValueError(f"torus polynomial {f} is reducible modulo {self.p}")
        if self.effective_val_lambda < self.threshold:
            raise ValueError(
                f"val_lambda={self.val_lambda} is below the threshold 2*n1 + n0 = {self.threshold}"
            )
        need = required_precision(*self.levels)
        if self.effective_precision < need:
            raise ValueError(f"precision {self.effective_precision} < required m + 2n + 2 = {need}")
        points = self.p ** ((self.depth + self.window_pad) * self.n * self.n)
        if points > MAX_WINDOW_POINTS:
            raise ValueError(f"window has {points} points (p^((depth + window_pad) n^2)); "
                             f"the exact enumeration is capped at {MAX_WINDOW_POINTS}")
        for name in ("outside_samples", "conjugations", "bch_samples"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, d: dict) -> PipelineConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)

    @classmethod
    def loads(cls, s: str) -> PipelineConfig:
        return cls.from_json(json.loads(s))


@dataclass
class StageReport:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    witness: dict | None = None
    seconds: float | None = None


@dataclass
class PipelineReport:
    config: dict = field(default_factory=dict)
    stages: list[StageReport] = field(default_factory=list)
    passed: bool = True
    schema_version: str = SCHEMA_VERSION
    functions: dict | None = None

    def stage(self, name: str) -> StageReport:
        return next(s for s in self.stages if s.name == name)

    def to_json(self) -> dict:
        d = {
            "schema_version": self.schema_version,
            "passed": self.passed,
            "config": self.config,
            "stages": [
                {k: v for k, v in asdict(s).items() if not (k == "seconds" and v is None)}
                for s in self.stages
            ],
        }
        if self.functions is not None:
            d["functions"] = self.functions
        return d

    @classmethod
    def from_json(cls, d: dict) -> PipelineReport:
        stages = [StageReport(s["name"], s["passed"], s.get("details", {}), s.get("witness"), s.get("seconds"))
                  for s in d.get("stages", [])]
        return cls(d.get("config", {}), stages, d.get("passed", True), d.get("schema_version", SCHEMA_VERSION),
                   d.get("functions"))


def emit_report(r: PipelineReport, fmt: str = "json") -> bytes:
    if fmt == "json":
        return (json.dumps(r.to_json(), sort_keys=True, indent=2) + "\n").encode()
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    lines = [f"cusp form pipeline (schema {r.schema_version}): {'PASS' if r.passed else 'FAIL'}"]
    for s in r.stages:
        t = f" [{s.seconds:.2f}s]" if s.seconds is not None else ""
        lines.append(f"  {s.name:<12} {'pass' if s.passed else 'FAIL'}{t}")
        for k in sorted(s.details):
            lines.append(f"      {k}: {json.dumps(s.details[k], sort_keys=True)}")
        if s.witness:
            lines.append(f"      witness: {json.dumps(s.witness, sort_keys=True)}")
    return ("\n".join(lines) + "\n").encode()


def _random_bch_pair(p: int, n: int, W: int, rng: np.random.Generator) -> tuple[ScaledMatrix, ScaledMatrix]:
    """X, Y in p*M_n(Z_p) mod p^W with val X + val Y <= W - 1."""
    while True:
        pair = []
        for _ in range(2):
            s = int(rng.integers(1, 3))
            rows = [[int(x) for x in rng.integers(0, p ** (W - s), size=n)] for _ in range(n)]
            pair.append(ScaledMatrix(p, s, W - s, tuple(map(tuple, rows))))
        vx, vy = (X.normalized().scale if not X.is_zero() else W for X in pair)
        if vx + vy <= W - 1:
            return pair[0], pair[1]


def bch_sweep(p: int, n: int, W: int, samples: int, seed: int) -> dict:
    """Random pairs through :func:`bch_defect_check`; returns counts and the first failure."""
    rng = np.random.default_rng(seed)
    tight = 0
    for i in range(samples):
        X, Y = _random_bch_pair(p, n, W, rng)
        w = bch_defect_check(X, Y)
        if not w.holds:
            return {"pairs": i + 1, "violations": 1, "witness": w.to_json()}
        if w.defect_valuation == w.required_valuation:
            tight += 1
    return {"pairs": samples, "violations": 0, "tight": tight}


def run_pipeline(cfg: PipelineConfig, keep_functions: bool = False) -> PipelineReport:
    """Run the configured stages; ``keep_functions`` attaches the intermediate functions as JSON."""
    cfg.validate()
    report = PipelineReport(config=cfg.to_json())
    p, n = cfg.p, cfg.n
    W = cfg.effective_precision
    parabolics = standard_parabolics(n)
    lie_stages = cfg.check in ("lie", "group", "ft", "all")
    group_stages = cfg.check in ("group", "all")

    def run(name, body):
        t0 = time.perf_counter()
        stage = StageReport(name, False)
        try:
            stage.details = body()
            stage.passed = True
        except (CuspViolation, ReductionMismatch) as exc:
            stage.details = {"error": str(exc)}
            stage.witness = exc.witness
        if cfg.timings:
            stage.seconds = round(time.perf_counter() - t0, 3)
        report.stages.append(stage)
        report.passed = report.passed and stage.passed
        return stage.passed

    state: dict = {}

    def torus():
        C, cert = companion_elliptic(cfg.torus_poly, prec=W)
        bump = elliptic_bump(C, cfg.depth, pad=cfg.window_pad)
        state["phi"] = bump.function
        w = bump.function.window
        return {"torus_poly": list(cfg.torus_poly.coeffs), "bump": bump.to_json(),
                "window": [w.a, w.b], "support_points": len(bump.function.values)}

    def fourier():
        phi = state["phi"]
        phi_hat = fourier_separable(phi)
        state["phi_hat"] = phi_hat
        w = phi_hat.window
        d = {"window": [w.a, w.b], "nonzero_points": len(phi_hat.values), "level": phi_hat.level}
        if cfg.check in ("ft", "all"):
            inv = fourier_separable(phi_hat) == phi.reflect()
            d["inversion_exact"] = inv
            if w.size <= 3**8:
                d["direct_matches_separable"] = fourier_transform(phi) == phi_hat
            if not inv or not d.get("direct_matches_separable", True):
                raise CuspViolation("Fourier transform consistency check failed", {"stage": "fourier"})
        return d

    def lie():
        phi_hat = state["phi_hat"]
        if phi_hat.is_zero():
            raise CuspViolation("transformed bump is zero", {})
        rep = lie_cusp_verify(phi_hat, parabolics, cfg.outside_samples, cfg.conjugations, cfg.seed)
        return rep.to_json()

    def scale():
        phi_hat = state["phi_hat"]
        n0, n1 = window_constants(phi_hat.window)
        v = cfg.effective_val_lambda
        phi_lam = scale_function(phi_hat, ScaledResidue(p, v, 1, W))
        state["phi_lam"] = phi_lam
        lvl_n, lvl_m = phi_lam.window.a, phi_lam.window.b
        return {"n0": n0, "n1": n1, "threshold": lambda_threshold(n0, n1), "val_lambda": v,
                "n": support_level(v, n1), "window": [lvl_n, lvl_m], "precision": W}

    def lift():
        phi_lam = state["phi_lam"]
        n0, n1 = window_constants(state["phi_hat"].window)
        f = lift_to_group(phi_lam, cfg.model, W,
                          {"n0": n0, "n1": n1, "val_lambda": cfg.effective_val_lambda})
        state["f"] = f
        if f.is_zero():
            raise CuspViolation("lifted function is zero", {})
        return {"model": f.model, "n_level": f.n_level, "m_level": f.m_level,
                "support_cosets": len(f.values), "cosets": f.window.size}

    def group():
        f = state["f"]
        rep = group_cusp_verify(f, parabolics, state["phi_lam"], min(cfg.outside_samples, 20), cfg.seed)
        jac = [jacquet_vanishing_check(f, P).to_json() for P in parabolics]
        d = rep.to_json()
        d["jacquet"] = jac
        bad = [j for j in jac if not j["passed"]]
        if bad:
            raise CuspViolation("Jacquet vanishing failed", {"jacquet": bad[0]})
        return d

    def bch():
        if p < 3:
            return {"skipped": "exp chart needs p >= 3"}
        d = bch_sweep(p, n, W, cfg.bch_samples, cfg.seed)
        if d["violations"]:
            raise CuspViolation("BCH lattice estimate violated", d["witness"])
        return d

    ok = True
    if lie_stages:
        ok = run("torus", torus) and run("fourier", fourier)
        if ok and cfg.check != "ft":
            ok = run("lie_cusp", lie)
    if ok and group_stages:
        ok = run("scale", scale) and run("lift", lift) and run("group_cusp", group)
    if ok and cfg.check in ("bch", "all"):
        run("bch", bch)

    if keep_functions:
        names = [("phi", "phi"), ("phi_hat", "phi_hat"), ("phi_lam", "phi_lambda"), ("f", "group_function")]
        report.functions = {out: state[k].to_json() for k, out in names if k in state}
    return report
