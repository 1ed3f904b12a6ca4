#!/usr/bin/env python3

import logging
import math
import os
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import typer
from dotenv import dotenv_values
from pydantic import BaseModel, Field, ValidationError, ValidationInfo, field_validator
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from . import __version__
from .config import (
    ARCHIVE_EXTENSION,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DUMP_EXTENSION,
    FREDHOLM_DEFAULT_ORDER,
    FREDHOLM_MAX_ORDER,
    LOG_FORMAT,
    LOG_LEVEL,
    MAX_CORRELATION_ORDER,
    MAX_N_ENSEMBLE,
    MAX_N_SAMPLER,
    RESULT_EXTENSION,
    RESULTS_DIR,
)
from .ergodic import (
    box_integral,
    configuration_from_spectrum,
    cotransition_density,
    ergodic_fourier,
    estimate_correlation,
    gamma2_diagnostic,
    omega_from_summary,
    regularity_trace,
    spectral_summary,
)
from .errors import HPKernelError, UsageError
from .hua_pickrell import (
    SeededRng,
    block_det_identity_check,
    hellinger_affinity,
    kakutani_divergence_report,
    random_halfplane_matrix,
    sample_corner_chain,
    sample_spectra,
)
from .limit_kernel import (
    LimitKernelParams,
    fn_P,
    fn_P_bessel,
    kernel_convergence_gap_matrix,
    kernel_inf_matrix,
    painleve_residual,
    scaled_finite_kernel_matrix,
    sigma_function,
    sine_kernel_form,
)
from .pseudo_jacobi import EnsembleParams, poly_p, poly_p_explicit, scaled_density
from .results import SampleRecord, read_archive, write_archive, write_manifest, write_matrix_dump, write_table

# Setup logging
logging.basicConfig(level=getattr(logging, LOG_LEVEL, logging.INFO), format=LOG_FORMAT)
logger = logging.getLogger(__name__)

# Initialize Rich console
console = Console()

# Initialize Typer app
app = typer.Typer(
    name="hp-kernel",
    help="Hua-Pickrell kernels, samplers and diagnostics",
    add_completion=False
)

Box = Tuple[Tuple[float, float], ...]

SAMPLING_COMMANDS = {"sample", "estimate-corr", "gamma2"}


class Command(str, Enum):
    EVAL_KERNEL = "eval-kernel"
    SAMPLE = "sample"
    ESTIMATE_CORR = "estimate-corr"
    CONVERGE = "converge"
    DISJOINTNESS = "disjointness"
    GAMMA2 = "gamma2"
    PAINLEVE = "painleve"
    SELFTEST = "selftest"


def _split(value: Any, cast: Callable) -> Any:
    if isinstance(value, str):
        return [cast(part) for part in value.split(",") if part.strip()]
    return value


def _parse_complex(value: Any) -> Any:
    if isinstance(value, str):
        z = complex(value.replace(" ", "").replace("i", "j"))
        return (z.real, z.imag)
    if isinstance(value, (int, float, complex)):
        return (complex(value).real, complex(value).imag)
    return value


class RunConfig(BaseModel):
    command: Command
    s_re: float = 0.0
    s_im: float = 0.0
    N: int = 50
    N_list: List[int] = [25, 50, 100, 200]
    seed: int = DEFAULT_SEED
    samples: int = DEFAULT_SAMPLES
    workers: int = Field(default_factory=lambda: os.cpu_count() or 1)
    output: Path = RESULTS_DIR
    grid: Optional[Tuple[float, float, int]] = None
    finite: bool = False
    corners: List[int] = []
    dump: bool = False
    boxes: List[Box] = []
    archive: Optional[Path] = None
    k: int = 1
    points: List[float] = []
    s1: Tuple[float, float] = (0.0, 0.0)
    s2: Tuple[float, float] = (1.0, 0.0)
    N_max: int = 10_000
    eps_list: List[float] = [0.2, 0.1, 0.05]
    t_list: List[float] = [0.8, 1.0, 2.0]
    order: int = FREDHOLM_DEFAULT_ORDER

    @property
    def s(self) -> complex:
        return complex(self.s_re, self.s_im)

    @property
    def s1_value(self) -> complex:
        return complex(*self.s1)

    @property
    def s2_value(self) -> complex:
        return complex(*self.s2)

    @field_validator("s_re")
    @classmethod
    def _check_s_re(cls, value: float) -> float:
        if not value > -0.5:
            raise ValueError("Re s must exceed -1/2")
        return value

    @field_validator("N")
    @classmethod
    def _check_N(cls, value: int, info: ValidationInfo) -> int:
        command = info.data.get("command")
        cap = MAX_N_SAMPLER if command is not None and command.value in SAMPLING_COMMANDS else MAX_N_ENSEMBLE
        if not 1 <= value <= cap:
            raise ValueError(f"N must be between 1 and {cap}")
        return value

    @field_validator("N_list", mode="before")
    @classmethod
    def _parse_N_list(cls, value: Any) -> Any:
        return _split(value, int)

    @field_validator("N_list")
    @classmethod
    def _check_N_list(cls, value: List[int], info: ValidationInfo) -> List[int]:
        command = info.data.get("command")
        cap = MAX_N_SAMPLER if command is not None and command.value in SAMPLING_COMMANDS else MAX_N_ENSEMBLE
        if not value:
            raise ValueError("N_list must be nonempty")
        for N in value:
            if not 1 <= N <= cap:
                raise ValueError(f"N must be between 1 and {cap}")
        return value

    @field_validator("samples")
    @classmethod
    def _check_samples(cls, value: int) -> int:
        if value < 1:
            raise ValueError("sample_count must be at least 1")
        return value

    @field_validator("workers")
    @classmethod
    def _check_workers(cls, value: int) -> int:
        if value < 1:
            raise ValueError("workers must be at least 1")
        return value

    @field_validator("seed")
    @classmethod
    def _check_seed(cls, value: int) -> int:
        if not 0 <= value < 2 ** 64:
            raise ValueError("seed must be a nonnegative 64-bit integer")
        return value

    @field_validator("grid", mode="before")
    @classmethod
    def _parse_grid(cls, value: Any) -> Any:
        if isinstance(value, str):
            parts = value.split(":")
            if len(parts) != 3:
                raise ValueError("grid must look like lo:hi:n")
            return (float(parts[0]), float(parts[1]), int(parts[2]))
        return value

    @field_validator("grid")
    @classmethod
    def _check_grid(cls, value):
        if value is not None and (value[2] < 1 or not value[0] <= value[1]):
            raise ValueError("grid must be nonempty")
        return value

    @field_validator("corners", mode="before")
    @classmethod
    def _parse_corners(cls, value: Any) -> Any:
        return _split(value, int)

    @field_validator("boxes", mode="before")
    @classmethod
    def _parse_boxes(cls, value: Any) -> Any:
        if isinstance(value, str):
            boxes = []
            for box in value.split(","):
                if box.strip():
                    sides = [side.split(":") for side in box.split("/")]
                    boxes.append(tuple((float(lo), float(hi)) for lo, hi in sides))
            return boxes
        return value

    @field_validator("points", "eps_list", "t_list", mode="before")
    @classmethod
    def _parse_floats(cls, value: Any) -> Any:
        return _split(value, float)

    @field_validator("points", "eps_list", "t_list")
    @classmethod
    def _check_nonempty(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("grid must be nonempty")
        return value

    @field_validator("s1", "s2", mode="before")
    @classmethod
    def _parse_s_pair(cls, value: Any) -> Any:
        return _parse_complex(value)

    @field_validator("s1", "s2")
    @classmethod
    def _check_s_pair(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        if not value[0] > -0.5:
            raise ValueError("Re s must exceed -1/2")
        return value

    @field_validator("k")
    @classmethod
    def _check_k(cls, value: int) -> int:
        if not 1 <= value <= MAX_CORRELATION_ORDER:
            raise ValueError(f"k must be between 1 and {MAX_CORRELATION_ORDER}")
        return value

    @field_validator("N_max")
    @classmethod
    def _check_N_max(cls, value: int) -> int:
        if value < 20:
            raise ValueError("N_max must be at least 20")
        return value

    @field_validator("order")
    @classmethod
    def _check_order(cls, value: int) -> int:
        if not 1 <= value <= FREDHOLM_MAX_ORDER:
            raise ValueError(f"order must be between 1 and {FREDHOLM_MAX_ORDER}")
        return value


_KEY_ALIASES = {"sample_count": "samples", "epsilon_list": "eps_list"}
_REQUIRED = {
    Command.EVAL_KERNEL: ("grid", "grid must be nonempty"),
    Command.ESTIMATE_CORR: ("boxes", "grid must be nonempty"),
    Command.CONVERGE: ("points", "grid must be nonempty"),
}


def _normalize_key(key: str) -> str:
    key = key.strip().replace("-", "_").lstrip("_")
    fields = {name.lower(): name for name in RunConfig.model_fields}
    lowered = key.lower()
    if lowered in _KEY_ALIASES:
        return _KEY_ALIASES[lowered]
    if lowered not in fields:
        raise UsageError("unknown configuration key", key=key)
    return fields[lowered]


def parse_config(command: str, flags: Optional[Dict[str, Any]] = None,
                 config_file: Optional[Path] = None) -> RunConfig:
    """Build a validated RunConfig; flags override values from the config file."""
    values: Dict[str, Any] = {}
    if config_file is not None:
        path = Path(config_file)
        if not path.exists():
            raise UsageError(f"config file not found: {path}", key="config")
        for key, value in dotenv_values(path).items():
            if value is not None:
                values[_normalize_key(key)] = value
    for key, value in (flags or {}).items():
        if value is not None:
            values[_normalize_key(key)] = value
    values["command"] = command

    try:
        config = RunConfig(**values)
    except ValidationError as e:
        error = e.errors()[0]
        key = str(error["loc"][0]) if error["loc"] else "config"
        message = error["msg"]
        if message.startswith("Value error, "):
            message = message[len("Value error, "):]
        raise UsageError(message, key=key) from None

    if config.command in _REQUIRED:
        name, message = _REQUIRED[config.command]
        if not getattr(config, name):
            raise UsageError(message, key=name)
    return config


# Command handlers. Each writes its result file and returns (path, summary).

Outcome = Tuple[Path, Dict[str, str]]


def _result_path(config: RunConfig, extension: str = RESULT_EXTENSION, stem: Optional[str] = None) -> Path:
    return Path(config.output) / f"{stem or config.command.value}{extension}"


def _eval_kernel(config: RunConfig) -> Outcome:
    lo, hi, n = config.grid
    xs = np.linspace(lo, hi, n)
    params = LimitKernelParams(config.s)
    with console.status("[bold green]Evaluating limit kernel..."):
        limit = kernel_inf_matrix(xs, params)
        finite = scaled_finite_kernel_matrix(xs, params, config.N) if config.finite else None

    columns = ["x1", "x2", "kernel_inf"]
    if finite is not None:
        columns.append("kernel_scaled_finite")
    sine = config.s == 0
    if sine:
        columns.append("sine_form")
    rows = []
    for i in range(n):
        for j in range(n):
            row = [xs[i], xs[j], limit[i, j]]
            if finite is not None:
                row.append(finite[i, j])
            if sine:
                row.append(sine_kernel_form(xs[i], xs[j]))
            rows.append(row)
    path = write_table(_result_path(config), config.command.value, columns, rows)
    summary = {}
    if sine:
        gap = max(abs(row[2] - row[-1]) for row in rows)
        summary["max_sine_gap"] = f"{gap:.3e}"
        console.print(f"Max |K - sine form| = {gap:.3e}")
    console.print(f"✅ {len(rows)} kernel values written to {path}")
    return path, summary


def _sample(config: RunConfig) -> Outcome:
    with console.status(f"[bold green]Sampling {config.samples} matrices of size {config.N}..."):
        batch = sample_spectra(config.N, config.s, config.seed, config.samples, config.workers,
                               corners=config.corners, keep_matrices=config.dump)
    records = []
    for i in range(batch.count):
        corners = {k: batch.spectra[k][i].tolist() for k in config.corners}
        records.append(SampleRecord(
            seed=config.seed, index=i, N=config.N, s_re=config.s_re, s_im=config.s_im,
            eigenvalues=batch.eigenvalues[i].tolist(), corners=corners,
        ))
    path = write_archive(_result_path(config, ARCHIVE_EXTENSION, stem="samples"), records)
    if config.dump:
        dump = write_matrix_dump(_result_path(config, DUMP_EXTENSION, stem="samples"), batch.matrices)
        console.print(f"💾 Matrices dumped to {dump}")
    console.print(f"✅ {batch.count} samples written to {path}")
    return path, {}


def _load_configurations(config: RunConfig) -> Tuple[List, int]:
    if config.archive is not None:
        records = read_archive(config.archive)
        if not records:
            raise UsageError(f"archive {config.archive} has no records", key="archive")
        N = records[0].N
        return [configuration_from_spectrum(r.eigenvalues, r.N) for r in records], N
    with console.status(f"[bold green]Sampling {config.samples} matrices of size {config.N}..."):
        batch = sample_spectra(config.N, config.s, config.seed, config.samples, config.workers)
    return [configuration_from_spectrum(row, config.N) for row in batch.eigenvalues], config.N


def _estimate_corr(config: RunConfig) -> Outcome:
    configs, N = _load_configurations(config)
    estimate = estimate_correlation(configs, config.boxes, config.k)
    params = EnsembleParams(config.s, N)

    columns = []
    for j in range(1, config.k + 1):
        columns += [f"lo{j}", f"hi{j}"]
    columns += ["mean", "stderr", "analytic"]

    table = Table(title=f"Order-{config.k} correlation estimates ({estimate.sample_count} samples)")
    table.add_column("Box", style="cyan")
    table.add_column("Mean", justify="right")
    table.add_column("Std. err.", justify="right")
    table.add_column("Analytic", justify="right")
    rows = []
    for box, mean, stderr in zip(estimate.boxes, estimate.means, estimate.stderr):
        analytic = box_integral(box, params)
        rows.append([bound for side in box for bound in side] + [mean, stderr, analytic])
        table.add_row(" x ".join(f"[{lo:g}, {hi:g}]" for lo, hi in box),
                      f"{mean:.5f}", f"{stderr:.5f}", f"{analytic:.5f}")
    console.print(table)
    path = write_table(_result_path(config), config.command.value, columns, rows)
    return path, {"N_effective": str(N)}


def _converge(config: RunConfig) -> Outcome:
    params = LimitKernelParams(config.s)
    table = Table(title="Scaled finite-N kernel against the limit")
    table.add_column("N", justify="right")
    table.add_column("Max gap", justify="right")
    table.add_column("Max relative gap", justify="right")
    rows = []
    with console.status("[bold green]Comparing kernels..."):
        for N in config.N_list:
            absolute = float(np.max(kernel_convergence_gap_matrix(config.points, params, N)))
            relative = float(np.max(kernel_convergence_gap_matrix(config.points, params, N, relative=True)))
            rows.append([N, absolute, relative])
            table.add_row(str(N), f"{absolute:.3e}", f"{relative:.3e}")
    console.print(table)
    decreasing = all(b[2] < a[2] for a, b in zip(rows, rows[1:]))
    path = write_table(_result_path(config), config.command.value, ["N", "max_gap", "max_relative_gap"], rows)
    return path, {"relative_gap_decreasing": str(decreasing).lower()}


def _disjointness(config: RunConfig) -> Outcome:
    with console.status("[bold green]Multiplying affinities..."):
        report = kakutani_divergence_report(config.s1_value, config.s2_value, config.N_max)
    rows = [[int(N), float(lp)] for N, lp in zip(report.N, report.log_products)]
    path = write_table(_result_path(config), config.command.value, ["N", "log_product"], rows)
    console.print(Panel(
        f"Fitted slope of log product vs log N: {report.slope:.6f}\n"
        f"Expected -|s1 - s2|^2 / 4:            {report.expected_slope:.6f}\n"
        f"Extrapolated N (1 - affinity):         {report.extrapolated_rate:.6f}",
        title="🔀 Kakutani product",
    ))
    return path, {
        "slope": "%.17g" % report.slope,
        "expected_slope": "%.17g" % report.expected_slope,
        "extrapolated_rate": "%.17g" % report.extrapolated_rate,
    }


def _gamma2(config: RunConfig) -> Outcome:
    N_top = max(config.N_list)
    corners = [N for N in config.N_list if N != N_top]
    with console.status(f"[bold green]Sampling {config.samples} matrices of size {N_top}..."):
        batch = sample_spectra(N_top, config.s, config.seed, config.samples, config.workers, corners=corners)
    report = gamma2_diagnostic(batch.spectra, config.N_list, config.eps_list, s=config.s)

    table = Table(title="Small-ball second moments")
    for name in ("N", "epsilon", "estimate", "stderr", "closed form"):
        table.add_column(name, justify="right")
    rows = []
    for row in report.rows:
        closed = row.closed_form if row.closed_form is not None else math.nan
        rows.append([row.N, row.epsilon, row.estimate, row.stderr, closed])
        table.add_row(str(row.N), f"{row.epsilon:g}", f"{row.estimate:.6f}", f"{row.stderr:.6f}",
                      "-" if row.closed_form is None else f"{row.closed_form:.6f}")
    console.print(table)
    path = write_table(_result_path(config), config.command.value,
                       ["N", "epsilon", "estimate", "stderr", "closed_form"], rows)
    return path, {"decreasing_in_epsilon": str(report.decreasing_in_epsilon).lower()}


def _painleve(config: RunConfig) -> Outcome:
    params = LimitKernelParams(config.s)
    rows = []
    table = Table(title="sigma-Painleve V residuals")
    for name in ("t", "sigma", "sigma'", "sigma''", "residual"):
        table.add_column(name, justify="right")
    with console.status("[bold green]Computing Fredholm determinants..."):
        for t in config.t_list:
            sv = sigma_function(t, params, order=config.order)
            residual = painleve_residual(t, params, order=config.order)
            rows.append([t, sv.sigma, sv.d_sigma, sv.dd_sigma, residual])
            table.add_row(f"{t:g}", f"{sv.sigma:.8f}", f"{sv.d_sigma:.8f}", f"{sv.dd_sigma:.8f}", f"{residual:.2e}")
    console.print(table)
    path = write_table(_result_path(config), config.command.value,
                       ["t", "sigma", "d_sigma", "dd_sigma", "residual"], rows)
    return path, {}


def _selftest_checks(config: RunConfig) -> List[Tuple[str, float, float]]:
    """(name, measured value, threshold); a check passes when value <= threshold."""
    checks = []

    params = EnsembleParams(0.5, 6)
    recurrence, explicit = poly_p(5, 0.7, params).value, poly_p_explicit(5, 0.7, params).value
    checks.append(("recurrence matches explicit polynomial", abs(recurrence - explicit) / abs(explicit), 1e-10))

    N = 20
    xs = np.linspace(-10, 10, 41)
    density = scaled_density(xs, EnsembleParams(0.0, N))
    exact = N * N / (math.pi * (1 + (N * xs) ** 2))
    checks.append(("density at s=0", float(np.max(np.abs(density - exact) / exact)), 1e-10))

    limit = kernel_inf_matrix([0.3, 0.7], LimitKernelParams(0.0))[0, 1]
    checks.append(("sine form at s=0", abs(limit - sine_kernel_form(0.3, 0.7)), 1e-12))

    bessel_gap = abs(fn_P(0.4, LimitKernelParams(0.5)) - fn_P_bessel(0.4, 0.5))
    checks.append(("Bessel form of P", bessel_gap, 1e-10))

    checks.append(("affinity of equal parameters", abs(1.0 - hellinger_affinity(0.3 + 1j, 0.3 + 1j, 50)), 0.0))

    rng = SeededRng(config.seed)
    gaps = [block_det_identity_check(random_halfplane_matrix(4, rng.spawn(i)), 0.5 + 0.5j, 2) for i in range(10)]
    checks.append(("block determinant identity", max(gaps), 1e-10))

    chain = sample_corner_chain(8, config.s, rng.spawn(100))
    checks.append(("corner interlacing", 0.0 if chain.interlacing_holds() else 1.0, 0.0))
    positive = all(cotransition_density(chain.spectrum(k - 1), chain.spectrum(k)) > 0 for k in range(2, 9))
    checks.append(("cotransition density positive on samples", 0.0 if positive else 1.0, 0.0))

    summary = regularity_trace(chain, [8])[0]
    identity = abs(summary.d - float(np.sum(summary.a_plus ** 2) + np.sum(summary.a_minus ** 2))) / max(1.0, summary.d)
    checks.append(("summary square identity", identity, 1e-12))
    checks.append(("characteristic function at 0", abs(ergodic_fourier(omega_from_summary(summary), [0.0], 64) - 1), 0.0))

    toy = spectral_summary([2.0, -1.0], 2)
    checks.append(("summary of (2, -1)", abs(toy.a_plus[0] - 1) + abs(toy.a_minus[0] - 0.5) + abs(toy.d - 1.25), 0.0))
    checks.append(("cotransition of (0) under (1, -1)", abs(cotransition_density([0.0], [1.0, -1.0]) - 0.5), 0.0))
    return checks


def _selftest(config: RunConfig) -> Outcome:
    with console.status("[bold green]Running self-test..."):
        checks = _selftest_checks(config)
    table = Table(title="Self-test")
    table.add_column("Property", style="cyan")
    table.add_column("Value", justify="right")
    table.add_column("Threshold", justify="right")
    table.add_column("Status", style="bold")
    rows = []
    for name, value, threshold in checks:
        passed = value <= threshold
        rows.append([name, value, threshold, int(passed)])
        table.add_row(name, f"{value:.2e}", f"{threshold:.0e}", "✅ pass" if passed else "❌ fail")
    console.print(table)
    failures = sum(1 for row in rows if not row[3])
    path = write_table(_result_path(config), config.command.value, ["property", "value", "threshold", "passed"], rows)
    return path, {"failures": str(failures)}


_HANDLERS: Dict[Command, Callable[[RunConfig], Outcome]] = {
    Command.EVAL_KERNEL: _eval_kernel,
    Command.SAMPLE: _sample,
    Command.ESTIMATE_CORR: _estimate_corr,
    Command.CONVERGE: _converge,
    Command.DISJOINTNESS: _disjointness,
    Command.GAMMA2: _gamma2,
    Command.PAINLEVE: _painleve,
    Command.SELFTEST: _selftest,
}

_MANIFEST_CORE = {"command", "s_re", "s_im", "N", "seed", "samples", "workers", "output"}


def run(config: RunConfig) -> int:
    """Execute one command; returns the process exit code."""
    try:
        Path(config.output).mkdir(parents=True, exist_ok=True)
        path, summary = _HANDLERS[config.command](config)
        options = {key: str(value) for key, value in config.model_dump(mode="json", exclude=_MANIFEST_CORE).items()}
        options.update({f"result.{key}": value for key, value in summary.items()})
        write_manifest(
            path, config.command.value, config.s, config.seed, __version__,
            N=config.N, samples=config.samples, options=options,
        )
    except HPKernelError as e:
        logger.error(f"{config.command.value} failed: {e}")
        console.print(f"[red]❌ {type(e).__name__}: {e}[/red]")
        return e.exit_code
    except Exception as e:
        console.print(f"❌ Error: {str(e)}")
        logger.exception("Unhandled exception")
        return 1

    if summary.get("failures", "0") != "0":
        return 1
    return 0


def _dispatch(ctx: typer.Context, command: str, **flags) -> None:
    options = dict(ctx.obj or {})
    config_file = options.pop("config", None)
    options.update(flags)
    try:
        config = parse_config(command, options, config_file)
    except UsageError as e:
        console.print(f"[red]❌ {e}[/red]")
        raise typer.Exit(e.exit_code)
    code = run(config)
    if code:
        raise typer.Exit(code)


@app.callback()
def global_options(
    ctx: typer.Context,
    s_re: Optional[float] = typer.Option(None, "--s-re", help="Real part of s (must exceed -1/2)"),
    s_im: Optional[float] = typer.Option(None, "--s-im", help="Imaginary part of s"),
    N: Optional[int] = typer.Option(None, "--N", help="Matrix size / particle number"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Random seed"),
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="key=value configuration file"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Output directory"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", help="Worker processes for sampling"),
    samples: Optional[int] = typer.Option(None, "--samples", help="Number of Monte Carlo samples"),
):
    """Global run options shared by every command."""
    ctx.obj = {
        "s_re": s_re, "s_im": s_im, "N": N, "seed": seed, "config": config,
        "output": output, "workers": workers, "samples": samples,
    }


@app.command("eval-kernel")
def eval_kernel(
    ctx: typer.Context,
    grid: Optional[str] = typer.Option(None, "--grid", help="lo:hi:n points per axis"),
    finite: Optional[bool] = typer.Option(None, "--finite/--no-finite", help="Also tabulate the scaled finite-N kernel"),
):
    """Tabulate the limit kernel on a square grid."""
    _dispatch(ctx, "eval-kernel", grid=grid, finite=finite)


@app.command()
def sample(
    ctx: typer.Context,
    corners: Optional[str] = typer.Option(None, "--corners", help="Corner sizes to record, e.g. 2,5"),
    dump: Optional[bool] = typer.Option(None, "--dump/--no-dump", help="Write a binary matrix dump"),
):
    """Sample Hua-Pickrell matrices into a JSON Lines archive."""
    _dispatch(ctx, "sample", corners=corners, dump=dump)


@app.command("estimate-corr")
def estimate_corr(
    ctx: typer.Context,
    boxes: Optional[str] = typer.Option(None, "--boxes", help="Boxes lo:hi[/lo:hi...] separated by commas"),
    archive: Optional[Path] = typer.Option(None, "--archive", help="Read spectra from a sample archive"),
    k: Optional[int] = typer.Option(None, "--k", help="Correlation order (1 to 3)"),
):
    """Estimate correlation measures of boxes from samples."""
    _dispatch(ctx, "estimate-corr", boxes=boxes, archive=archive, k=k)


@app.command()
def converge(
    ctx: typer.Context,
    points: Optional[str] = typer.Option(None, "--points", help="Comma-separated points"),
    N_list: Optional[str] = typer.Option(None, "--N-list", help="Comma-separated sizes"),
):
    """Compare the scaled finite-N kernel with its limit."""
    _dispatch(ctx, "converge", points=points, N_list=N_list)


@app.command()
def disjointness(
    ctx: typer.Context,
    s1: Optional[str] = typer.Option(None, "--s1", help="First parameter, e.g. 0 or 1+0.5j"),
    s2: Optional[str] = typer.Option(None, "--s2", help="Second parameter"),
    N_max: Optional[int] = typer.Option(None, "--N-max", help="Last factor of the product"),
):
    """Kakutani products of Hellinger affinities."""
    _dispatch(ctx, "disjointness", s1=s1, s2=s2, N_max=N_max)


@app.command()
def gamma2(
    ctx: typer.Context,
    N_list: Optional[str] = typer.Option(None, "--N-list", help="Comma-separated sizes"),
    eps_list: Optional[str] = typer.Option(None, "--eps-list", help="Comma-separated radii"),
):
    """Small-ball second moments of the scaled spectrum."""
    _dispatch(ctx, "gamma2", N_list=N_list, eps_list=eps_list)


@app.command()
def painleve(
    ctx: typer.Context,
    t_list: Optional[str] = typer.Option(None, "--t-list", help="Comma-separated t values"),
    order: Optional[int] = typer.Option(None, "--order", help="Nystrom order"),
):
    """sigma-Painleve V residuals of the limit Fredholm determinant."""
    _dispatch(ctx, "painleve", t_list=t_list, order=order)


@app.command()
def selftest(ctx: typer.Context):
    """Run the invariant suite and print pass/fail per property."""
    _dispatch(ctx, "selftest")


def main():
    """Main entry point."""
    try:
        app()
    except KeyboardInterrupt:
        console.print("\n👋 Goodbye!")
    except Exception as e:
        console.print(f"❌ Error: {str(e)}")
        logger.exception("Unhandled exception")


if __name__ == "__main__":
    main()
