"""Command-line front end: parameter sweeps, data emission, self-validation.

Subcommands: ``spectral``, ``sigma``, ``sigma-dc``, ``osr``, ``occupation``,
``validate``.  Options may come from ``--config <json>`` (flat keys mirroring
:class:`RunConfig`) with command-line flags taking precedence.  Output is
CSV (``#``-prefixed metadata header) or JSON, formatted to 12 significant
digits so identical configurations give byte-identical files.

Exit codes: 0 success, 1 validation failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import __version__, response, validate
from .errors import ConfigError, NHResponseError
from .greens import Framework, spectral_function
from .observables import expectation, occupation
from .quadrature import QuadratureSpec
from .tachyon import (
    DcFormula,
    OsrFormula,
    SIGMA_Z,
    TachyonParams,
    current_j,
    current_tilde,
    hamiltonian,
    osr_closed,
    sigma_dc_closed,
)

FRAMEWORKS = ("standard", "phqm-j", "phqm-tilde", "postselected")
SWEEPABLE = ("omega", "k", "m", "gamma")


@dataclass
class RunConfig:
    """Flat run configuration; JSON config files use exactly these keys."""

    v_f: float = 1.0
    delta: float = 1.0
    m: float = 0.0
    mu: float = 0.0
    gamma: float = 1.5
    temperature: float = 0.0
    framework: str = "standard"
    sweep_variable: str | None = None
    sweep_start: float | None = None
    sweep_stop: float | None = None
    sweep_points: int | None = None
    k_start: float = -4.0
    k_stop: float = 4.0
    k_points: int = 81
    out: str | None = None
    format: str = "csv"
    delta0: float = 1e-6
    rel_tol: float | None = None
    abs_tol: float | None = None
    max_subdivisions: int | None = None

    def validated(self) -> "RunConfig":
        if self.framework not in FRAMEWORKS:
            raise ConfigError(
                f"unknown framework {self.framework!r}; allowed: {', '.join(FRAMEWORKS)}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.format!r}; allowed: csv, json")
        if self.sweep_variable is not None:
            if self.sweep_variable not in SWEEPABLE:
                raise ConfigError(
                    f"unknown sweep variable {self.sweep_variable!r}; "
                    f"allowed: {', '.join(SWEEPABLE)}")
            if self.sweep_points is None or self.sweep_points < 2:
                raise ConfigError("sweep needs points >= 2")
            if self.sweep_start is None or self.sweep_stop is None \
                    or not self.sweep_start < self.sweep_stop:
                raise ConfigError("sweep needs start < stop")
        if self.k_points < 2 or not self.k_start < self.k_stop:
            raise ConfigError("k grid needs k_start < k_stop and k_points >= 2")
        if self.delta0 <= 0:
            raise ConfigError("delta0 must be positive")
        return self

    def params(self) -> TachyonParams:
        try:
            return TachyonParams(v_f=self.v_f, delta=self.delta, m=self.m,
                                 mu=self.mu, gamma=self.gamma)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def sweep_values(self, default=None):
        if self.sweep_variable is None:
            if default is None:
                raise ConfigError("this command requires --sweep")
            return default[0], np.asarray(default[1])
        return self.sweep_variable, np.linspace(
            self.sweep_start, self.sweep_stop, self.sweep_points)

    def specs(self):
        """(omega, k) quadrature specs, with config overrides applied."""
        def build(rel, ab, mx):
            return QuadratureSpec(
                rel_tol=self.rel_tol if self.rel_tol is not None else rel,
                abs_tol=self.abs_tol if self.abs_tol is not None else ab,
                max_subdivisions=self.max_subdivisions or mx)
        return build(1e-9, 1e-13, 2000), build(3e-8, 1e-12, 2000)


def _effective_gamma(cfg: RunConfig) -> float:
    # clean-limit regularization: a strict 0+ becomes delta0
    return cfg.gamma if cfg.gamma > 0 else cfg.delta0


def build_framework(cfg: RunConfig) -> Framework:
    name = cfg.framework
    if name == "standard":
        fw = Framework.standard(_effective_gamma(cfg))
        if fw.gamma <= abs(cfg.m):
            raise ConfigError(
                f"standard framework needs gamma > |m| (gamma={fw.gamma}, m={cfg.m})")
        return fw
    if name in ("phqm-j", "phqm-tilde"):
        if cfg.m**2 >= cfg.delta**2:
            raise ConfigError(
                f"PHQM needs m^2 < Delta^2 (m={cfg.m}, Delta={cfg.delta})")
        return Framework.phqm(_effective_gamma(cfg))
    return Framework.postselected()


def response_operators(cfg: RunConfig, p: TachyonParams):
    h_of_k = lambda k: hamiltonian(k, p)
    if cfg.framework == "phqm-tilde":
        j_of_k = lambda k: current_tilde(k, p)
    else:
        j_of_k = lambda k: current_j(p)
    return h_of_k, j_of_k


def _fmt(x) -> str:
    return f"{float(x):.12g}"


def _metadata(cfg: RunConfig, command: str) -> dict:
    spec_o, spec_k = cfg.specs()
    meta = {"tool": f"nhresponse {__version__}", "command": command}
    meta.update({k: v for k, v in asdict(cfg).items() if v is not None})
    meta.update({
        "omega_rel_tol": spec_o.rel_tol, "omega_abs_tol": spec_o.abs_tol,
        "k_rel_tol": spec_k.rel_tol, "k_abs_tol": spec_k.abs_tol,
        "max_subdivisions": spec_o.max_subdivisions,
    })
    return meta


def emit_table(cfg: RunConfig, command: str, columns, rows) -> str:
    """Render the table per the configured format (deterministic layout)."""
    meta = _metadata(cfg, command)
    if cfg.format == "csv":
        lines = [f"# {key} = {value}" for key, value in meta.items()]
        lines.append(",".join(columns))
        for row in rows:
            lines.append(",".join(_fmt(x) for x in row))
        return "\n".join(lines) + "\n"
    payload = {
        "metadata": meta,
        "columns": list(columns),
        "rows": [[float(_fmt(x)) for x in row] for row in rows],
    }
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"


def _write(cfg: RunConfig, text: str):
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- subcommand implementations ---------------------------------------------

def cmd_spectral(cfg: RunConfig) -> int:
    p = cfg.params()
    fw = build_framework(cfg)
    if cfg.framework == "postselected":
        raise ConfigError("spectral function is undefined for postselection")
    _var, omegas = cfg.sweep_values(default=("omega", np.linspace(-4.0, 4.0, 161)))
    if _var != "omega":
        raise ConfigError("spectral sweeps over omega (use --sweep omega)")
    ks = np.linspace(cfg.k_start, cfg.k_stop, cfg.k_points)
    rows = []
    for k in ks:
        H = hamiltonian(float(k), p)
        xi = np.linalg.eigvals(H)
        xi = xi[np.argsort(xi.real)]
        for w in omegas:
            rows.append((w, k, spectral_function(H, fw, float(w)),
                         xi[0].real, xi[0].imag, xi[-1].real, xi[-1].imag))
    text = emit_table(cfg, "spectral",
                      ("omega", "k", "A", "re_xi_minus", "im_xi_minus",
                       "re_xi_plus", "im_xi_plus"), rows)
    _write(cfg, text)
    return 0


def cmd_sigma(cfg: RunConfig) -> int:
    if cfg.framework == "postselected":
        raise ConfigError(
            "optical conductivity is not defined for postselection here; "
            "allowed: standard, phqm-j, phqm-tilde")
    p = cfg.params()
    fw = build_framework(cfg)
    h_of_k, j_of_k = response_operators(cfg, p)
    var, omegas = cfg.sweep_values(default=("omega", np.linspace(0.1, 6.0, 60)))
    if var != "omega":
        raise ConfigError("sigma sweeps over omega")
    spec_o, spec_k = cfg.specs()
    chi0 = response.chi_local(h_of_k, j_of_k, j_of_k, fw, 0.0, cfg.temperature,
                              spec_o, spec_k)
    rows = []
    for w in omegas:
        if w == 0.0:
            r = response.sigma_dc(h_of_k, j_of_k, fw, cfg.temperature, spec_o, spec_k)
            rows.append((w, r.value.real, 0.0, r.est_error))
            continue
        r = response.sigma_optical(h_of_k, j_of_k, j_of_k, fw, float(w),
                                   cfg.temperature, spec_o, spec_k, chi0=chi0)
        rows.append((w, r.value.real, r.value.imag, r.est_error))
    _write(cfg, emit_table(cfg, "sigma",
                           ("omega", "sigma_re", "sigma_im", "est_error"), rows))
    return 0


def _closed_dc(cfg: RunConfig, p: TachyonParams) -> float:
    formula = {"standard": DcFormula.STANDARD, "phqm-j": DcFormula.PHQM_J,
               "phqm-tilde": DcFormula.PHQM_TILDE,
               "postselected": DcFormula.POSTSELECTED}[cfg.framework]
    return sigma_dc_closed(formula, p)


def cmd_sigma_dc(cfg: RunConfig) -> int:
    var, values = cfg.sweep_values(default=(None, [None]))
    if var not in (None, "m", "gamma"):
        raise ConfigError("sigma-dc sweeps over m or gamma")
    spec_o, spec_k = cfg.specs()
    rows = []
    for v in values:
        point = cfg if v is None else _replace_field(cfg, var, float(v))
        p = point.params()
        fw = build_framework(point)
        closed = _closed_dc(point, p)
        if point.framework == "postselected":
            rows.append(((v if v is not None else 0.0), np.nan, closed, np.nan))
            continue
        h_of_k, j_of_k = response_operators(point, p)
        r = response.sigma_dc(h_of_k, j_of_k, fw, point.temperature, spec_o, spec_k)
        rel = abs(r.value.real - closed) / max(abs(closed), 1e-300)
        rows.append(((v if v is not None else 0.0), r.value.real, closed, rel))
    label = var or "point"
    _write(cfg, emit_table(cfg, "sigma-dc",
                           (label, "sigma_dc", "sigma_dc_closed", "rel_error"),
                           rows))
    return 0


def cmd_osr(cfg: RunConfig) -> int:
    if cfg.framework == "postselected":
        raise ConfigError("the optical sum rule is not computed for postselection")
    var, values = cfg.sweep_values(default=(None, [None]))
    if var not in (None, "m", "gamma"):
        raise ConfigError("osr sweeps over m or gamma")
    spec_o, spec_k = cfg.specs()
    rows = []
    for v in values:
        point = cfg if v is None else _replace_field(cfg, var, float(v))
        p = point.params()
        fw = build_framework(point)
        h_of_k, j_of_k = response_operators(point, p)
        r = response.optical_sum(h_of_k, j_of_k, fw, spec_o, spec_k)
        if point.framework == "phqm-tilde":
            closed = osr_closed(p, OsrFormula.EXACT)
        else:
            closed = 1.0
        rel = abs(r.value.real - closed) / max(abs(closed), 1e-300)
        rows.append(((v if v is not None else 0.0), r.value.real, closed, rel))
    label = var or "point"
    _write(cfg, emit_table(cfg, "osr",
                           (label, "optical_sum", "closed_form", "rel_error"),
                           rows))
    return 0


def cmd_occupation(cfg: RunConfig) -> int:
    p = cfg.params()
    fw = build_framework(cfg)
    var, ks = cfg.sweep_values(default=("k", np.linspace(cfg.k_start, cfg.k_stop,
                                                         cfg.k_points)))
    if var != "k":
        raise ConfigError("occupation sweeps over k")
    rows = []
    for k in ks:
        H = hamiltonian(float(k), p)
        n = occupation(H, fw)
        sz = expectation(SIGMA_Z, H, fw)
        rows.append((k, n[0, 0].real, n[1, 1].real, n[0, 1].real, n[0, 1].imag,
                     np.trace(n).real, sz.real, sz.imag))
    _write(cfg, emit_table(cfg, "occupation",
                           ("k", "n00", "n11", "n01_re", "n01_im", "trace",
                            "sz_re", "sz_im"), rows))
    return 0


def cmd_validate(cfg: RunConfig, fast: bool = False) -> int:
    results = validate.run_all(fast=fast)
    report = validate.format_report(results)
    sys.stdout.write(report + "\n")
    if cfg.out:
        rows = [(i, r.reference, r.computed, r.error, r.tol, float(r.passed))
                for i, r in enumerate(results)]
        _write(cfg, emit_table(cfg, "validate",
                               ("index", "reference", "computed", "error",
                                "tol", "passed"), rows))
    return 0 if all(r.passed for r in results) else 1


def _replace_field(cfg: RunConfig, name: str, value):
    data = asdict(cfg)
    data[name] = value
    return RunConfig(**data)


# --- argument parsing --------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nhresponse",
        description="Transport and spectra of the NH Dirac model under "
                    "standard, pseudo-Hermitian and postselected prescriptions.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--config", help="JSON file with RunConfig keys")
        sp.add_argument("--framework", choices=FRAMEWORKS)
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--delta0", type=float,
                        help="clean-limit regulator (default 1e-6)")
        sp.add_argument("--vf", dest="v_f", type=float)
        sp.add_argument("--delta", type=float)
        sp.add_argument("--m", type=float)
        sp.add_argument("--mu", type=float)
        sp.add_argument("--gamma", type=float)
        sp.add_argument("--temperature", type=float)
        sp.add_argument("--rel-tol", dest="rel_tol", type=float)
        sp.add_argument("--abs-tol", dest="abs_tol", type=float)
        sp.add_argument("--max-subdivisions", dest="max_subdivisions", type=int)
        sp.add_argument("--sweep", dest="sweep_variable", choices=SWEEPABLE)
        sp.add_argument("--start", dest="sweep_start", type=float)
        sp.add_argument("--stop", dest="sweep_stop", type=float)
        sp.add_argument("--points", dest="sweep_points", type=int)
        sp.add_argument("--k-start", dest="k_start", type=float)
        sp.add_argument("--k-stop", dest="k_stop", type=float)
        sp.add_argument("--k-points", dest="k_points", type=int)

    for name in ("spectral", "sigma", "sigma-dc", "osr", "occupation"):
        add_common(sub.add_parser(name))
    vp = sub.add_parser("validate")
    add_common(vp)
    vp.add_argument("--fast", action="store_true",
                    help="reduced sample counts and grids")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    data = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        known = {f.name for f in fields(RunConfig)}
        unknown = set(file_data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        data.update(file_data)
    for f in fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            data[f.name] = value
    return RunConfig(**data).validated()


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        if args.command == "spectral":
            return cmd_spectral(cfg)
        if args.command == "sigma":
            return cmd_sigma(cfg)
        if args.command == "sigma-dc":
            return cmd_sigma_dc(cfg)
        if args.command == "osr":
            return cmd_osr(cfg)
        if args.command == "occupation":
            return cmd_occupation(cfg)
        if args.command == "validate":
            return cmd_validate(cfg, fast=args.fast)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NHResponseError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
