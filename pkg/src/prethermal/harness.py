"""Sweep orchestration: configs, caching, CSV emission and SVG plots.

Every run kind (dynamics, spectrum, expansions, jc) maps one
:class:`SweepConfig` to a deterministic set of CSV files.  Results are
computed into a content-addressed cache directory (the config digest keys
the entry) and copied to the output directory, so a rerun with cache
policy ``reuse`` yields byte-identical files without recomputation.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import re
import shutil
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .ed import FloquetDense, correlation_series, floquet_spectrum, infinite_time_corr
from .expansions import (
    conjugate_series,
    conjugate_series_orders,
    dpre_expand,
    floquet_magnus,
    h_pre,
    omega_norms,
)
from .fitting import critical_jtau
from .models import COUPLING_PROFILES, MODEL_KINDS, build_model, collective, dipolar
from .pauli import OperatorSum, intensive_norm, norm, to_text
from .qcfind import build_basis, lambda_matrix

__all__ = [
    "SweepConfig",
    "RunRecord",
    "run_dynamics",
    "run_spectrum",
    "run_expansions",
    "run_jc",
    "emit_plot",
    "cache_root",
]

_DIGEST_EXCLUDED = ("out", "cache", "workers")


@dataclass(frozen=True)
class SweepConfig:
    """One sweep request; JSON-compatible and canonically hashable."""

    model: str = "kdm"
    L: tuple = (8,)
    jtau: tuple = (0.5,)
    r_c: int = 3
    orders: tuple = (7,)
    observables: tuple = (("Z", "Z"),)
    n_max: int = 200
    coupling_profile: str = "nearest_neighbor"
    threshold: float = 0.5
    top_k: int = 3
    J: float = 1.0
    dump_jtau: tuple = ()
    out: str = "./out"
    cache: str = "reuse"
    workers: int = 1

    def __post_init__(self):
        if self.cache not in ("reuse", "overwrite"):
            raise ValueError("cache policy must be 'reuse' or 'overwrite'")
        if self.coupling_profile not in COUPLING_PROFILES:
            raise ValueError(f"unknown coupling profile {self.coupling_profile!r}")
        if self.model not in MODEL_KINDS + ("both",):
            raise ValueError(f"unknown model {self.model!r}")
        if not self.L or not self.jtau_values():
            raise ValueError("L list and jtau grid must be nonempty")

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        normalized = dict(data)
        for key in ("L", "orders", "dump_jtau"):
            if key in normalized:
                normalized[key] = tuple(normalized[key])
        if "observables" in normalized:
            normalized["observables"] = tuple(
                tuple(item) if isinstance(item, (list, tuple)) else item
                for item in normalized["observables"]
            )
        if "jtau" in normalized and isinstance(normalized["jtau"], (list, tuple)):
            normalized["jtau"] = tuple(normalized["jtau"])
        return cls(**normalized)

    @classmethod
    def from_file(cls, path) -> "SweepConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def jtau_values(self) -> list:
        """Resolve the grid: either an explicit tuple or a start/stop/step map."""
        spec = self.jtau
        if isinstance(spec, dict):
            start, stop, step = spec["start"], spec["stop"], spec["step"]
            if step <= 0:
                raise ValueError("grid step must be positive")
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + k * step, 10) for k in range(count)]
        return [float(v) for v in spec]

    def canonical(self) -> str:
        """Canonical JSON encoding of the digest-relevant fields."""
        data = dataclasses.asdict(self)
        for key in _DIGEST_EXCLUDED:
            data.pop(key, None)
        return json.dumps(data, sort_keys=True, separators=(",", ":"), default=list)

    def digest(self, run_kind: str) -> str:
        payload = f"{run_kind}\n{self.canonical()}".encode()
        return hashlib.sha256(payload).hexdigest()

    def replace(self, **kw) -> "SweepConfig":
        return dataclasses.replace(self, **kw)


@dataclass
class RunRecord:
    digest: str
    version: str
    created: str
    files: list
    reused: bool = False

    def manifest(self) -> dict:
        return {
            "digest": self.digest,
            "version": self.version,
            "created": self.created,
            "files": list(self.files),
        }


def cache_root() -> Path:
    return Path(os.environ.get("PRETHERMAL_CACHE", "./cache"))


def _fmt(value) -> str:
    if value is None:
        return "no-crossing"
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: Path, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def read_csv(path) -> tuple[list, list]:
    text = Path(path).read_text().strip().splitlines()
    header = text[0].split(",")
    rows = [line.split(",") for line in text[1:]]
    return header, rows


def _run_cached(config: SweepConfig, run_kind: str, builder) -> RunRecord:
    digest = config.digest(run_kind)
    entry = cache_root() / f"{run_kind}-{digest[:16]}"
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    record_path = entry / "record.json"
    if config.cache == "reuse" and record_path.exists():
        manifest = json.loads(record_path.read_text())
        for name in manifest["files"]:
            shutil.copyfile(entry / name, out_dir / name)
        return RunRecord(reused=True, **manifest)
    staging = entry.parent / (entry.name + ".tmp")
    if staging.exists():
        shutil.rmtree(staging)
    staging.mkdir(parents=True)
    files = sorted(builder(config, staging))
    record = RunRecord(
        digest=digest,
        version=__version__,
        created=datetime.now(timezone.utc).isoformat(),
        files=files,
    )
    (staging / "record.json").write_text(json.dumps(record.manifest(), indent=2) + "\n")
    if entry.exists():
        shutil.rmtree(entry)
    staging.rename(entry)
    for name in files:
        shutil.copyfile(entry / name, out_dir / name)
    return record


def _pool_map(fn, keys, workers: int) -> dict:
    """Evaluate fn over keys on a bounded pool; results keyed, order-free."""
    if workers <= 1 or len(keys) <= 1:
        return {key: fn(key) for key in keys}
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {key: pool.submit(fn, key) for key in keys}
        return {key: fut.result() for key, fut in futures.items()}


# ---------------------------------------------------------------------------
# observable registry
# ---------------------------------------------------------------------------

_OBS_RE = re.compile(r"^(X|Y|Z|D_[xyz]|Hbar|Hpre\(\d+\)|Dpre\(\d+\)|eigen\(\d+\))$")


def validate_observable_name(name: str):
    if not _OBS_RE.match(name):
        raise ValueError(f"unknown observable {name!r}")


class ModelContext:
    """Lazy builders for one (model kind, L): spectra, series, observables."""

    def __init__(self, kind: str, L: int, config: SweepConfig):
        self.kind = kind
        self.L = L
        self.config = config
        self.base = build_model(
            kind, J=config.J, tau=1.0, L=L, coupling_profile=config.coupling_profile
        )
        self._dense = None
        self._magnus = None
        self._spectrum = (None, None)  # (tau, FloquetSpectrum)
        self._dpre = (None, None, None)  # (tau, order, OperatorSum)
        self._lambda = (None, None)

    def model(self, jtau: float):
        return self.base.with_tau(jtau / self.config.J)

    def dense(self) -> FloquetDense:
        if self._dense is None:
            self._dense = FloquetDense(self.base)
        return self._dense

    def spectrum(self, jtau: float):
        tau = jtau / self.config.J
        if self._spectrum[0] != tau:
            self._spectrum = (tau, floquet_spectrum(self.dense().unitary(tau)))
        return self._spectrum[1]

    def magnus(self, m_max: int):
        if self._magnus is None or len(self._magnus) <= m_max:
            self._magnus = floquet_magnus(self.base, m_max)
        return self._magnus

    def dpre(self, jtau: float, order: int) -> OperatorSum:
        tau = jtau / self.config.J
        if self._dpre[0] != tau or self._dpre[1] != order:
            s, d = dpre_expand(self.base.with_tau(tau), j_max=order)
            self._dpre = (tau, order, conjugate_series(d, s, order))
        return self._dpre[2]

    def lambda_at(self, jtau: float):
        tau = jtau / self.config.J
        if self._lambda[0] != tau:
            basis = build_basis(self.L, self.config.r_c)
            self._lambda = (tau, lambda_matrix(basis, self.spectrum(jtau)))
        return self._lambda[1]

    def observable(self, name: str, jtau: float) -> OperatorSum:
        validate_observable_name(name)
        if name in ("X", "Y", "Z"):
            return collective(name.lower(), self.L)
        if name.startswith("D_"):
            return dipolar(name[2], self.L, self.config.coupling_profile)
        if name == "Hbar":
            return self.base.average_hamiltonian()
        inner = int(name[name.index("(") + 1 : -1])
        if name.startswith("Hpre"):
            return h_pre(self.magnus(inner), inner, tau=jtau / self.config.J)
        if name.startswith("Dpre"):
            return self.dpre(jtau, inner)
        # eigen(k), 1-based
        lam = self.lambda_at(jtau)
        if not 1 <= inner <= len(lam.eigenvalues):
            raise ValueError(f"eigen index {inner} out of range")
        return lam.eigen_observable(inner - 1)


def _model_kinds(config: SweepConfig) -> list:
    return list(MODEL_KINDS) if config.model == "both" else [config.model]


def _jt_tag(jtau: float) -> str:
    return repr(float(round(jtau, 10)))


# ---------------------------------------------------------------------------
# run kinds
# ---------------------------------------------------------------------------


def _build_dynamics(config: SweepConfig, out: Path) -> list:
    pairs = [tuple(p) for p in config.observables]
    for pair in pairs:
        for name in pair:
            validate_observable_name(name)
    files = []
    for kind in _model_kinds(config):
        for L in sorted(config.L):
            ctx = ModelContext(kind, L, config)

            def one(jtau, ctx=ctx, kind=kind, L=L):
                spectrum = ctx.spectrum(jtau)
                model = ctx.model(jtau)
                out_rows = {}
                for pair in pairs:
                    o = ctx.observable(pair[0], jtau)
                    op = o if pair[1] == pair[0] else ctx.observable(pair[1], jtau)
                    series = correlation_series(
                        o, op, model, config.n_max, spectrum=spectrum, labels=pair
                    )
                    out_rows[pair] = series.values
                return out_rows

            results = _pool_map(one, config.jtau_values(), config.workers)
            for jtau in config.jtau_values():
                for pair in pairs:
                    name = f"{kind}_L{L}_jtau{_jt_tag(jtau)}_{pair[0]}_{pair[1]}.csv"
                    values = results[jtau][pair]
                    write_csv(
                        out / name,
                        ["n", "value"],
                        ((n, float(v)) for n, v in enumerate(values)),
                    )
                    files.append(name)
    return files


def run_dynamics(config: SweepConfig) -> RunRecord:
    """Stroboscopic correlation series per (L, Jtau, observable pair)."""
    return _run_cached(config, "dynamics", _build_dynamics)


def _build_spectrum(config: SweepConfig, out: Path) -> list:
    files = []
    for kind in _model_kinds(config):
        for L in sorted(config.L):
            basis = build_basis(L, config.r_c)
            ctx = ModelContext(kind, L, config)

            def one(jtau, ctx=ctx, basis=basis):
                return lambda_matrix(basis, ctx.spectrum(jtau))

            results = _pool_map(one, config.jtau_values(), config.workers)
            rows = []
            dumps = []
            for jtau in config.jtau_values():
                lam = results[jtau]
                top = lam.eigenvalues[: config.top_k]
                rows.append([jtau] + [float(v) for v in top])
                if any(abs(jtau - d) < 1e-12 for d in config.dump_jtau):
                    for k in range(min(config.top_k, len(lam.eigenvalues))):
                        name = f"{kind}_L{L}_jtau{_jt_tag(jtau)}_eigen{k + 1}.txt"
                        (out / name).write_text(to_text(lam.eigen_observable(k)))
                        dumps.append(name)
            name = f"{kind}_L{L}_lambda.csv"
            header = ["jtau"] + [f"lambda_{k + 1}" for k in range(config.top_k)]
            write_csv(out / name, header, rows)
            files.append(name)
            files.extend(dumps)
    return files


def run_spectrum(config: SweepConfig) -> RunRecord:
    """Top Lambda eigenvalues vs Jtau per system size, plus eigen-observable dumps."""
    return _run_cached(config, "spectrum", _build_spectrum)


def _build_expansions(config: SweepConfig, out: Path) -> list:
    files = []
    m_max = max(config.orders)
    jts = config.jtau_values()
    for kind in _model_kinds(config):
        fidelity_rows = {m: [] for m in config.orders}
        dpre_fidelity_rows = {m: [] for m in config.orders}
        for L in sorted(config.L):
            ctx = ModelContext(kind, L, config)
            series = ctx.magnus(m_max)
            name = f"{kind}_L{L}_omega_norms.csv"
            write_csv(
                out / name,
                ["m", "norm_normalized"],
                list(enumerate(omega_norms(series, L))),
            )
            files.append(name)
            infidelity_rows = []
            dpre_infidelity_rows = []
            for jtau in jts:
                tau = jtau / config.J
                spectrum = ctx.spectrum(jtau)
                for m in range(m_max + 1):
                    o = h_pre(series, m, tau=tau)
                    fid = infinite_time_corr(o, o, spectrum)
                    infidelity_rows.append([jtau, m, 1.0 - fid])
                    if m in config.orders:
                        fidelity_rows[m].append([jtau, L, fid])
                if kind == "kdm":
                    s_ser, d_ser = dpre_expand(ctx.model(jtau), j_max=m_max)
                    components = conjugate_series_orders(d_ser, s_ser, m_max)
                    dpre_name = f"kdm_L{L}_jtau{_jt_tag(jtau)}_dpre_norms.csv"
                    write_csv(
                        out / dpre_name,
                        ["m", "norm_normalized"],
                        [[j, intensive_norm(c)] for j, c in enumerate(components)],
                    )
                    files.append(dpre_name)
                    running = OperatorSum.zero(L)
                    for j, component in enumerate(components):
                        running = running + component
                        if j < 2:
                            continue
                        fid = infinite_time_corr(running, running, spectrum)
                        dpre_infidelity_rows.append([jtau, j, 1.0 - fid])
                        if j in config.orders:
                            dpre_fidelity_rows[j].append([jtau, L, fid])
            name = f"{kind}_L{L}_hpre_infidelity.csv"
            write_csv(out / name, ["jtau", "m", "infidelity"], infidelity_rows)
            files.append(name)
            if kind == "kdm":
                name = f"kdm_L{L}_dpre_infidelity.csv"
                write_csv(out / name, ["jtau", "m", "infidelity"], dpre_infidelity_rows)
                files.append(name)
        for m in config.orders:
            name = f"{kind}_hpre_fidelity_order{m}.csv"
            write_csv(out / name, ["jtau", "L", "fidelity"], fidelity_rows[m])
            files.append(name)
            if kind == "kdm":
                name = f"kdm_dpre_fidelity_order{m}.csv"
                write_csv(out / name, ["jtau", "L", "fidelity"], dpre_fidelity_rows[m])
                files.append(name)
    return files


def run_expansions(config: SweepConfig) -> RunRecord:
    """Expansion norms, infidelity vs order, and fidelity vs Jtau files."""
    return _run_cached(config, "expansions", _build_expansions)


_JC_DEFAULT_OBSERVABLES = {"kdm": ("Hbar", "D_z"), "adm": ("Hbar",)}


def _build_jc(config: SweepConfig, out: Path) -> list:
    files = []
    summary = []
    jts = config.jtau_values()
    for kind in _model_kinds(config):
        flat = [o for o in config.observables if isinstance(o, str)]
        names = tuple(flat) or _JC_DEFAULT_OBSERVABLES[kind]
        for name in names:
            validate_observable_name(name)
        per_obs_jc = {name: [] for name in names}
        for L in sorted(config.L):
            ctx = ModelContext(kind, L, config)

            def one(jtau, ctx=ctx, names=names):
                spectrum = ctx.spectrum(jtau)
                values = {}
                for name in names:
                    o = ctx.observable(name, jtau)
                    values[name] = infinite_time_corr(o, o, spectrum)
                return values

            results = _pool_map(one, jts, config.workers)
            curves = {name: [results[jt][name] for jt in jts] for name in names}
            for name in names:
                values = curves[name]
                reference = values[0]  # smallest scanned Jtau stands in for Jtau -> 0
                normalized = [v / reference for v in values]
                fname = f"jc_{kind}_{name}_L{L}.csv"
                write_csv(
                    out / fname,
                    ["jtau", "value", "normalized"],
                    [[jt, v, nv] for jt, v, nv in zip(jts, values, normalized)],
                )
                files.append(fname)
                jc = critical_jtau(list(zip(jts, normalized)), config.threshold)
                per_obs_jc[name].append((L, jc, reference))
        for name in names:
            for L, jc, _ in per_obs_jc[name]:
                summary.append([f"{kind}:{name}", L, jc])
    write_csv(out / "jc_summary.csv", ["observable", "control", "jc_tau"], summary)
    files.append("jc_summary.csv")
    return files


def run_jc(config: SweepConfig) -> RunRecord:
    """Normalized infinite-time autocorrelations vs Jtau and their 0.5-crossings."""
    return _run_cached(config, "jc", _build_jc)


# ---------------------------------------------------------------------------
# plotting (presentational only)
# ---------------------------------------------------------------------------


def emit_plot(csv_files, plot_spec: dict, out_svg) -> Path:
    """Static SVG line/scatter plot from CSV files with a declared header.

    ``plot_spec`` keys: x, y (column names), optional kind ('line' or
    'scatter'), logy, group_by (one line per distinct value), title.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if isinstance(csv_files, (str, Path)):
        csv_files = [csv_files]
    x_col, y_col = plot_spec["x"], plot_spec["y"]
    kind = plot_spec.get("kind", "line")
    group_by = plot_spec.get("group_by")
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for path in csv_files:
        header, rows = read_csv(path)
        for col in filter(None, (x_col, y_col, group_by)):
            if col not in header:
                raise ValueError(f"column {col!r} missing from {path}")
        xi, yi = header.index(x_col), header.index(y_col)
        if group_by:
            gi = header.index(group_by)
            groups = sorted({row[gi] for row in rows})
            for g in groups:
                xs = [float(r[xi]) for r in rows if r[gi] == g]
                ys = [float(r[yi]) for r in rows if r[gi] == g]
                _draw(ax, kind, xs, ys, f"{group_by}={g}")
        else:
            xs = [float(r[xi]) for r in rows]
            ys = [float(r[yi]) for r in rows]
            _draw(ax, kind, xs, ys, Path(path).stem)
    if plot_spec.get("logy"):
        ax.set_yscale("log")
    ax.set_xlabel(x_col)
    ax.set_ylabel(y_col)
    if plot_spec.get("title"):
        ax.set_title(plot_spec["title"])
    ax.legend(fontsize=7)
    out_svg = Path(out_svg)
    out_svg.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(out_svg, format="svg")
    plt.close(fig)
    return out_svg


def _draw(ax, kind, xs, ys, label):
    if kind == "scatter":
        ax.plot(xs, ys, "o", ms=3, label=label)
    else:
        ax.plot(xs, ys, lw=1.2, label=label)
