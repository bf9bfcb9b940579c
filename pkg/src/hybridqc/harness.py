"""Seeded Monte Carlo campaigns and their aggregation.

Each trial draws its randomness from ``substream(master_seed, trial, attack)``,
so a campaign gives the same numbers whether it runs on one worker or many,
and different attacks on a shared seed do not reuse each other's draws.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import adversary as ad
from . import protocol as pr
from . import quantum as qc
from .errors import ConfigError, EmptyBatch, InvalidArgument, NoSignal, ReportParseError, UnsupportedVersion
from .quantum import MeasurementBasis
from .sampling import correlated_batch, correlator_mean, substream
from .scenario import ScenarioConfig, from_items, to_items

ROLES = ("Bob", "EveClassical", "EveQuantum", "EveInterceptResend", "Guesser")


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    role: str
    phi_true: float
    phi_est: float
    circular_error: float
    state_fidelity: float
    visibility: float
    flags: str = ""

    def hit(self, delta: float) -> bool:
        return not self.flags and self.circular_error <= delta


@dataclass(frozen=True)
class RoleSummary:
    role: str
    n_trials: int
    n_flagged: int
    accuracy: tuple  # ((window, mean, sigma), ...)
    fidelity: float
    fid_sigma: float | None
    visibility: float
    vis_sigma: float | None

    def accuracy_at(self, delta: float) -> tuple[float, float | None]:
        for w, mean, sigma in self.accuracy:
            if math.isclose(w, delta, rel_tol=1e-12, abs_tol=1e-15):
                return mean, sigma
        raise KeyError(delta)


@dataclass
class CampaignReport:
    config: ScenarioConfig
    master_seed: int
    negativity: float
    holevo_bits: float
    roles: tuple
    windows: int
    records: list = field(default_factory=list, compare=False, repr=False)

    def role(self, name: str) -> RoleSummary:
        for r in self.roles:
            if r.role == name:
                return r
        raise KeyError(name)


# --- aggregation ------------------------------------------------------------

def windowed_sigma(values: Sequence[float], windows: int) -> tuple[float, float | None]:
    """Grand mean and the standard deviation of contiguous block means.

    Blocks have ``len(values) // windows`` entries with the remainder in the
    last block.  Sigma is None when fewer than two blocks exist.
    """
    values = np.asarray(values, dtype=float)
    if windows < 1:
        raise InvalidArgument("windows must be >= 1")
    if values.size < windows:
        raise InvalidArgument(f"{values.size} records cannot fill {windows} windows")
    size = values.size // windows
    bounds = [i * size for i in range(windows)] + [values.size]
    means = np.array([values[bounds[i]:bounds[i + 1]].mean() for i in range(windows)])
    # Shifting by one block mean keeps identical blocks at exactly zero spread.
    sigma = float((means - means[0]).std(ddof=1)) if windows > 1 else None
    return float(values.mean()), sigma


def standard_error(sigma: float | None, windows: int) -> float | None:
    """Uncertainty of the grand mean implied by the spread of block means."""
    return None if sigma is None else sigma / math.sqrt(windows)


def summarize(records: Sequence[TrialRecord], role: str, deltas, windows: int) -> RoleSummary:
    recs = [r for r in records if r.role == role]
    w = min(windows, len(recs))
    acc = tuple((d, *windowed_sigma([float(r.hit(d)) for r in recs], w)) for d in deltas)
    fid, fid_s = windowed_sigma([r.state_fidelity for r in recs], w)
    vis, vis_s = windowed_sigma([r.visibility for r in recs], w)
    return RoleSummary(role, len(recs), sum(bool(r.flags) for r in recs), acc, fid, fid_s, vis, vis_s)


# --- trials -----------------------------------------------------------------

def _bob_record(i, phi, corr, fid, alphabet):
    est, err, _, flag = pr.bob_decode(phi, corr, alphabet)
    return TrialRecord(i, "Bob", phi, est, err, fid, min(1.0, corr.amplitude), flag)


def run_trial(cfg: ScenarioConfig, i: int, backend=None) -> list[TrialRecord]:
    s = cfg.session
    rng = substream(cfg.master_seed, i, ad.KINDS.index(cfg.attack.kind))
    k = int(rng.integers(s.alphabet.size))
    phi = pr.encode_symbol(k, s.alphabet)
    n = s.pairs_per_symbol
    try:
        if cfg.attack.kind == "None":
            corr = pr.bob_measure_batch(pr.transmit(phi, s), n, s.detector, rng, backend=backend)
            return [_bob_record(i, phi, corr, pr.transmission_fidelity(phi, s), s.alphabet)]
        out = ad.attack_trial(cfg.attack, phi, s, n, rng, backend)
    except EmptyBatch:
        return [TrialRecord(i, "Bob", phi, math.nan, math.nan, pr.transmission_fidelity(phi, s), 0.0,
                            "empty-batch")]
    bob = _bob_record(i, phi, out.bob_correlators, out.bob_state_fidelity, s.alphabet)
    eve = TrialRecord(i, cfg.attack.eve_role, phi, out.eve_phi_est, out.eve_circular_error,
                      out.eve_state_fidelity, bob.visibility)
    return [bob, eve]


def _run_range(cfg, start, stop, backend):
    out = []
    for i in range(start, stop):
        out.extend(run_trial(cfg, i, backend))
    return out


def run_scenario(cfg: ScenarioConfig, workers: int = 1, backend=None) -> CampaignReport:
    """Run ``cfg.trials`` trials and aggregate them per role."""
    if cfg.master_seed is None:
        raise ConfigError("master_seed", "a seed is required to run a scenario")
    if workers < 1:
        raise InvalidArgument("workers must be >= 1")
    n = cfg.trials
    if workers == 1:
        records = _run_range(cfg, 0, n, backend)
    else:
        edges = np.linspace(0, n, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(lambda j: _run_range(cfg, edges[j], edges[j + 1], backend), range(workers))
            records = [r for part in parts for r in part]
    return build_report(cfg, records)


def build_report(cfg: ScenarioConfig, records: list) -> CampaignReport:
    roles = [r for r in ROLES if any(rec.role == r for rec in records)]
    summaries = tuple(summarize(records, role, cfg.window_deltas, cfg.windows_for_sigma) for role in roles)
    strategy = cfg.attack if cfg.attack.kind != "None" else ad.AttackStrategy("None")
    return CampaignReport(
        config=cfg,
        master_seed=cfg.master_seed,
        negativity=chain_negativity(cfg),
        holevo_bits=ad.attack_holevo(strategy, cfg.session),
        roles=summaries,
        windows=min(cfg.windows_for_sigma, cfg.trials),
        records=records,
    )


def chain_negativity(cfg: ScenarioConfig) -> float:
    """Negativity of the legitimate channel chain, computed analytically."""
    return qc.negativity(pr.transmit(0.0, cfg.session))


def blind_guesser_records(trials: int, seed: int, alphabet: pr.PhaseAlphabet) -> list[TrialRecord]:
    """Reference role that ignores the channel and guesses a uniform phase."""
    out = []
    for i in range(trials):
        rng = substream(seed, i)
        phi = pr.encode_symbol(int(rng.integers(alphabet.size)), alphabet)
        est = rng.uniform(0.0, pr.TWO_PI)
        out.append(TrialRecord(i, "Guesser", phi, est, pr.circular_distance(est, phi),
                               ad.eve_reconstruction_fidelity(est, phi), 0.0))
    return out


# --- fringe visibility ------------------------------------------------------

def fringe(cfg: ScenarioConfig, samples_per_point: int, rng: np.random.Generator, backend=None) -> np.ndarray:
    """Coincidence fringe (1 + E(theta))/2 with Alice in X and Bob swept around the equator."""
    if samples_per_point < 100:
        raise InvalidArgument("samples_per_point must be >= 100")
    s = cfg.session
    frame = rng.uniform(0.0, pr.TWO_PI)
    rho = ad.bob_channel_state(cfg.attack, 0.0, s, frame)
    alice = MeasurementBasis.x()
    values = []
    for j in range(cfg.fringe_points):
        bob = MeasurementBasis.equatorial(2 * math.pi * j / cfg.fringe_points)
        total, kept = correlated_batch(qc.joint_probabilities(rho, alice, bob), samples_per_point,
                                       s.detector, rng, backend)
        values.append(0.5 * (1 + correlator_mean(total, kept)))
    return np.array(values)


def visibility_from_fringes(cfg: ScenarioConfig, samples_per_point: int, rng: np.random.Generator,
                            backend=None) -> float:
    """(max - min) / (max + min) over the sampled fringe grid, without fitting.

    Grid extrema under-read a sinusoid by at most 1 - cos(pi / fringe_points).
    """
    f = fringe(cfg, samples_per_point, rng, backend)
    hi, lo = f.max(), f.min()
    if hi + lo <= 0.0:
        raise NoSignal("fringe has no coincidences")
    return float((hi - lo) / (hi + lo))


# --- persistence --------------------------------------------------------------

FORMAT_VERSION = "1"
_HEADER = "# hybridqc campaign report\n"
_RECORD_FIELDS = ("role", "window", "n", "flagged", "accuracy", "acc_sigma", "fidelity", "fid_sigma",
                  "visibility", "vis_sigma")


def _fmt(x) -> str:
    return "undefined" if x is None else repr(float(x))


def format_report(report: CampaignReport) -> str:
    lines = [_HEADER.rstrip("\n"),
             f"format_version = {FORMAT_VERSION}",
             f"master_seed = {report.master_seed}",
             f"negativity = {report.negativity!r}",
             f"holevo_bits = {report.holevo_bits!r}",
             f"windows = {report.windows}"]
    lines += [f"config.{k} = {v}" for k, v in to_items(report.config).items()]
    lines.append("[records]")
    count = 0
    for r in report.roles:
        for w, mean, sigma in r.accuracy:
            lines.append(" ".join([
                f"role={r.role}", f"window={w!r}", f"n={r.n_trials}", f"flagged={r.n_flagged}",
                f"accuracy={mean!r}", f"acc_sigma={_fmt(sigma)}", f"fidelity={r.fidelity!r}",
                f"fid_sigma={_fmt(r.fid_sigma)}", f"visibility={r.visibility!r}", f"vis_sigma={_fmt(r.vis_sigma)}",
            ]))
            count += 1
    lines.append(f"[end] records={count}")
    return "\n".join(lines) + "\n"


def persist_report(report: CampaignReport, path) -> None:
    data = format_report(report).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(data)


def load_report(path) -> CampaignReport:
    with open(path, "rb") as fh:
        data = fh.read()
    return parse_report(data)


def _num(text, offset, name, optional=False):
    if optional and text == "undefined":
        return None
    try:
        return float(text)
    except ValueError:
        raise ReportParseError(offset, name, f"not a number: {text!r}") from None


def parse_report(data: bytes) -> CampaignReport:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ReportParseError(exc.start, "encoding", "file is not valid UTF-8") from None

    header: dict[str, tuple[str, int]] = {}
    config_items: dict[str, str] = {}
    rows = []
    offset = 0
    section = "header"
    end_count = None
    end_offset = 0
    for raw in text.splitlines(keepends=True):
        line_offset = offset
        offset += len(raw.encode("utf-8"))
        line = raw.rstrip("\n")
        if not raw.endswith("\n"):
            raise ReportParseError(line_offset, "line", "unterminated final line (truncated file?)")
        if end_count is not None:
            raise ReportParseError(line_offset, "[end]", "content after end marker")
        if not line or line.startswith("#"):
            continue
        if section == "header":
            if line == "[records]":
                section = "records"
                continue
            if " = " not in line:
                raise ReportParseError(line_offset, line.split()[0] if line.split() else "line",
                                       "expected 'key = value'")
            key, value = line.split(" = ", 1)
            if key == "format_version" and value != FORMAT_VERSION:
                raise UnsupportedVersion(line_offset, "format_version", f"unsupported version {value!r}")
            if key.startswith("config."):
                config_items[key[len("config."):]] = value
            else:
                header[key] = (value, line_offset)
            continue
        if line.startswith("[end]"):
            _, _, cnt = line.partition("records=")
            try:
                end_count = int(cnt)
            except ValueError:
                raise ReportParseError(line_offset, "records", f"bad record count {cnt!r}") from None
            end_offset = line_offset
            continue
        fields = {}
        col = line_offset
        for token in line.split(" "):
            name, eq, value = token.partition("=")
            if not eq:
                raise ReportParseError(col, name, "expected name=value")
            fields[name] = (value, col)
            col += len(token.encode("utf-8")) + 1
        missing = [f for f in _RECORD_FIELDS if f not in fields]
        if missing:
            raise ReportParseError(line_offset, missing[0], "missing field in record line")
        rows.append(fields)

    if "format_version" not in header:
        raise ReportParseError(0, "format_version", "missing format version")
    if section != "records" or end_count is None:
        raise ReportParseError(offset, "[end]", "report is truncated: no end marker")
    if end_count != len(rows):
        raise ReportParseError(end_offset, "records", f"expected {end_count} records, found {len(rows)}")
    for key in ("master_seed", "negativity", "holevo_bits", "windows"):
        if key not in header:
            raise ReportParseError(offset, key, "missing header field")

    try:
        cfg = from_items(config_items)
    except ConfigError as exc:
        raise ReportParseError(0, f"config.{exc.field}", str(exc)) from None

    roles: dict[str, dict] = {}
    for f in rows:
        name = f["role"][0]
        acc = (_num(f["window"][0], f["window"][1], "window"),
               _num(f["accuracy"][0], f["accuracy"][1], "accuracy"),
               _num(f["acc_sigma"][0], f["acc_sigma"][1], "acc_sigma", optional=True))
        entry = roles.setdefault(name, {"acc": [], "f": f})
        entry["acc"].append(acc)
    summaries = []
    for name, entry in roles.items():
        f = entry["f"]
        try:
            n_trials, flagged = int(f["n"][0]), int(f["flagged"][0])
        except ValueError:
            raise ReportParseError(f["n"][1], "n", "bad trial count") from None
        summaries.append(RoleSummary(
            name, n_trials, flagged, tuple(entry["acc"]),
            _num(f["fidelity"][0], f["fidelity"][1], "fidelity"),
            _num(f["fid_sigma"][0], f["fid_sigma"][1], "fid_sigma", optional=True),
            _num(f["visibility"][0], f["visibility"][1], "visibility"),
            _num(f["vis_sigma"][0], f["vis_sigma"][1], "vis_sigma", optional=True),
        ))
    seed_text, seed_off = header["master_seed"]
    try:
        seed = int(seed_text)
    except ValueError:
        raise ReportParseError(seed_off, "master_seed", f"bad seed {seed_text!r}") from None
    return CampaignReport(
        config=cfg,
        master_seed=seed,
        negativity=_num(*header["negativity"], "negativity"),
        holevo_bits=_num(*header["holevo_bits"], "holevo_bits"),
        roles=tuple(summaries),
        windows=int(header["windows"][0]),
    )


def dump_trials(records: Sequence[TrialRecord], path) -> None:
    """Tab-separated per-trial dump."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("trial\trole\tphi_true\tphi_est\tcirc_err\tfidelity\tflags\n")
        for r in records:
            fh.write(f"{r.trial}\t{r.role}\t{r.phi_true!r}\t{r.phi_est!r}\t{r.circular_error!r}\t"
                     f"{r.state_fidelity!r}\t{r.flags or '-'}\n")
