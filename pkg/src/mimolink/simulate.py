"""Deterministic Monte Carlo sweep over noise powers for one MIMO link.

One trial transmits one transport block end to end: payload bits, framing,
Gray mapping, the 1/sqrt(N_t) power scaling, pilot transmission, channel
estimation, equalization, detection, bit recovery and the CRC check. A
fresh channel is drawn per block and fresh noise per channel use.

Every trial derives its own random stream from (seed, noise index, trial
index) through SeedSequence spawn keys, so results are independent of
execution order and thread count; rerunning a sweep with the same seed
yields a byte-identical CSV.
"""

from __future__ import annotations

import ast
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import metrics
from .channel import ChannelRealization, LinkGeometry, apply_channel, large_scale_gain, sample_channel
from .constellation import SUPPORTED_SIZES, ConstellationTable, build_constellation, map_bits_to_symbols, symbols_to_bits
from .estimation import PILOT_MODES, PilotBlock, build_pilot_matrix, estimate_lmmse, estimate_ls, transmit_pilots
from .framing import CrcSpec, build_transport_blocks, extract_and_check, load_payload_bits
from .neural import (
    Hyperparameters,
    Network,
    NetworkSpec,
    TrainingDivergedError,
    TrainingSet,
    init_network,
    predict,
    train,
)
from .receiver import detect_kmeans, detect_ml, equalize_lmmse, equalize_zf

log = logging.getLogger(__name__)

DETECTORS = ("ml", "kmeans", "dnn")
ESTIMATORS = ("ls", "lmmse")
EQUALIZERS = ("zf", "lmmse")
FEATURE_MODES = ("equalized", "raw")
LABEL_SOURCES = ("truth", "ml")

# chosen to span the BLER waterfall of the default 16x16 64-QAM link
DEFAULT_NOISE_GRID = (1e-4, 5e-4, 1e-3, 5e-3, 1e-2, 5e-2)

CSV_COLUMNS = (
    "noise_power",
    "snr_tx_db",
    "ebn0_tx_db",
    "channel_mse",
    "bler",
    "ser",
    "ber",
    "classification_error",
    "detector",
    "estimator",
    "seed",
)

# spawn-key namespaces: trials vs. per-noise-point detector training
_TRIAL_NS = 0
_TRAINING_NS = 1


class ConfigError(ValueError):
    """Invalid, inconsistent or unknown simulation parameter."""


@dataclass(frozen=True)
class SimConfig:
    """Full parameter surface of one simulation run."""

    seed: int = 7
    N_t: int = 16
    N_r: int = 16
    constellation: str = "QAM"
    M_constellation: int = 64
    codeword_size: int = 16
    crc_length: int = 2
    crc_generator: str = "111"
    n_pilot: int = 20
    pilot_mode: str = "unitary-random"
    noise_power: tuple = DEFAULT_NOISE_GRID
    f_c: float = 1.8e9
    d: float = 100.0
    eta: float = 2.0
    B: float = 20e6
    N0: float | None = None
    G_override: float | None = 1.0
    detector: str = "ml"
    estimator: str = "ls"
    equalizer: str = "zf"
    n_transmissions: int = 1000
    payload: str | None = None
    output: str = "output.csv"
    workers: int = 1
    dnn_depth: int = 2
    dnn_width: int = 16
    dnn_learning_rate: float = 0.05
    dnn_batch_size: int = 64
    dnn_epochs: int = 200
    dnn_validation_fraction: float = 0.2
    dnn_patience: int = 10
    dnn_train_samples: int = 10000
    dnn_features: str = "equalized"
    dnn_labels: str = "truth"

    def __post_init__(self):
        # sweeps run (and are seeded) in ascending noise order
        raw = self.noise_power
        if np.isscalar(raw):
            raw = (raw,)
        object.__setattr__(self, "noise_power", tuple(sorted(float(v) for v in raw)))


def validate_config(config: SimConfig) -> None:
    """Raise :class:`ConfigError` naming the first offending parameter."""
    if config.N_t < 1 or config.N_r < 1:
        raise ConfigError(f"antenna counts must be >= 1, got N_t={config.N_t}, N_r={config.N_r}")
    m = config.M_constellation
    if m < 2 or (m & (m - 1)):
        raise ConfigError(f"M_constellation = {m} invalid: Must be a power of two")
    if m not in SUPPORTED_SIZES:
        raise ConfigError(f"M_constellation = {m} unsupported; supported sizes: {SUPPORTED_SIZES}")
    if config.constellation not in ("QAM", "QPSK"):
        raise ConfigError(f"constellation = {config.constellation!r}; expected 'QAM' or 'QPSK'")
    if config.constellation == "QPSK" and m != 4:
        raise ConfigError(f"constellation QPSK implies M_constellation = 4, got {m}")
    if config.codeword_size < 1:
        raise ConfigError(f"codeword_size must be >= 1, got {config.codeword_size}")
    try:
        crc = CrcSpec(config.crc_generator)
    except ValueError as exc:
        raise ConfigError(f"crc_generator invalid: {exc}") from exc
    if crc.crc_length != config.crc_length:
        raise ConfigError(
            f"crc_length = {config.crc_length} does not match generator "
            f"{config.crc_generator!r} (degree {crc.crc_length})"
        )
    if config.n_pilot < config.N_t:
        raise ConfigError(f"n_pilot = {config.n_pilot} must be at least N_t = {config.N_t}")
    if config.pilot_mode not in PILOT_MODES:
        raise ConfigError(f"pilot_mode = {config.pilot_mode!r}; expected one of {PILOT_MODES}")
    if not config.noise_power:
        raise ConfigError("noise_power list must not be empty")
    if any(v <= 0 for v in config.noise_power):
        raise ConfigError(f"noise powers must be positive, got {config.noise_power}")
    if config.f_c <= 0:
        raise ConfigError(f"f_c must be positive, got {config.f_c}")
    if config.d < 1.0:
        raise ConfigError(f"d must be at least 1 m, got {config.d}")
    if config.eta < 2:
        raise ConfigError(f"eta must be at least 2, got {config.eta}")
    if config.B <= 0:
        raise ConfigError(f"B must be positive, got {config.B}")
    if config.N0 is not None and config.N0 < 0:
        raise ConfigError(f"N0 must be nonnegative, got {config.N0}")
    if config.G_override is not None and config.G_override <= 0:
        raise ConfigError(f"G_override must be positive, got {config.G_override}")
    if config.detector not in DETECTORS:
        raise ConfigError(f"detector = {config.detector!r}; expected one of {DETECTORS}")
    if config.estimator not in ESTIMATORS:
        raise ConfigError(f"estimator = {config.estimator!r}; expected one of {ESTIMATORS}")
    if config.equalizer not in EQUALIZERS:
        raise ConfigError(f"equalizer = {config.equalizer!r}; expected one of {EQUALIZERS}")
    if config.equalizer == "zf" and config.N_r < config.N_t:
        raise ConfigError(
            f"equalizer 'zf' needs N_r >= N_t, got N_r={config.N_r}, N_t={config.N_t}"
        )
    if config.n_transmissions < 1:
        raise ConfigError(f"n_transmissions must be >= 1, got {config.n_transmissions}")
    if config.workers < 1:
        raise ConfigError(f"workers must be >= 1, got {config.workers}")
    if config.dnn_features not in FEATURE_MODES:
        raise ConfigError(f"dnn_features = {config.dnn_features!r}; expected one of {FEATURE_MODES}")
    if config.dnn_features == "raw" and config.N_t != 1:
        raise ConfigError("dnn_features = 'raw' is only supported for N_t = 1")
    if config.dnn_labels not in LABEL_SOURCES:
        raise ConfigError(f"dnn_labels = {config.dnn_labels!r}; expected one of {LABEL_SOURCES}")
    if config.dnn_depth < 1 or config.dnn_width < 1:
        raise ConfigError("dnn_depth and dnn_width must be >= 1")
    if config.dnn_train_samples < 1:
        raise ConfigError(f"dnn_train_samples must be >= 1, got {config.dnn_train_samples}")
    try:
        Hyperparameters(
            learning_rate=config.dnn_learning_rate,
            batch_size=config.dnn_batch_size,
            epochs=config.dnn_epochs,
            validation_fraction=config.dnn_validation_fraction,
            patience=config.dnn_patience,
        )
    except ValueError as exc:
        raise ConfigError(f"dnn hyperparameters invalid: {exc}") from exc


_INT_FIELDS = {
    "seed", "N_t", "N_r", "M_constellation", "codeword_size", "crc_length",
    "n_pilot", "n_transmissions", "workers", "dnn_depth", "dnn_width",
    "dnn_batch_size", "dnn_epochs", "dnn_patience", "dnn_train_samples",
}
_FLOAT_FIELDS = {"f_c", "d", "eta", "B", "dnn_learning_rate", "dnn_validation_fraction"}
_OPTIONAL_FLOAT_FIELDS = {"N0", "G_override"}
_OPTIONAL_STR_FIELDS = {"payload"}


def _coerce(name: str, value):
    if name == "noise_power":
        if isinstance(value, str):
            value = _parse_value(value)
        if np.isscalar(value):
            value = (value,)
        try:
            return tuple(float(v) for v in value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"noise_power = {value!r} is not a list of numbers") from exc
    if name == "crc_generator":
        return str(value)
    if name in _INT_FIELDS:
        try:
            as_float = float(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{name} = {value!r} is not an integer") from exc
        if as_float != int(as_float):
            raise ConfigError(f"{name} = {value!r} is not an integer")
        return int(as_float)
    if name in _FLOAT_FIELDS:
        try:
            return float(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{name} = {value!r} is not a number") from exc
    if name in _OPTIONAL_FLOAT_FIELDS:
        if value is None or (isinstance(value, str) and value.lower() in ("none", "")):
            return None
        try:
            return float(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{name} = {value!r} is not a number") from exc
    if name in _OPTIONAL_STR_FIELDS:
        if value is None or (isinstance(value, str) and value.lower() in ("none", "")):
            return None
        return str(value)
    return str(value)


def _parse_value(text: str):
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text  # bare strings like QAM or output.csv


def _read_config_file(path) -> dict:
    raw = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        raw[key.strip()] = _parse_value(value.strip())
    return raw


def load_config(path=None, overrides: dict | None = None) -> SimConfig:
    """Build a validated configuration from a key = value file plus overrides.

    An empty (or absent) file yields the defaults. Unknown keys are
    rejected rather than silently ignored. When ``N0`` is given without an
    explicit ``noise_power``, the single noise power N0 * B is used; an
    explicit ``noise_power`` always wins.
    """
    raw = _read_config_file(path) if path is not None else {}
    known = {f.name for f in fields(SimConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown parameter(s): {', '.join(unknown)}")
    values = {key: _coerce(key, value) for key, value in raw.items()}
    if values.get("N0") is not None and "noise_power" not in values:
        bandwidth = values.get("B", SimConfig.B)
        values["noise_power"] = (float(values["N0"]) * float(bandwidth),)
    config = SimConfig(**values)
    if overrides:
        cleaned = {
            key: _coerce(key, value) for key, value in overrides.items() if value is not None
        }
        unknown = sorted(set(cleaned) - known)
        if unknown:
            raise ConfigError(f"unknown parameter(s): {', '.join(unknown)}")
        config = replace(config, **cleaned)
    validate_config(config)
    return config


def substream(seed: int, *path: int) -> np.random.Generator:
    """Independent deterministic stream for (seed, path) via spawn keys."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(path)))


def link_gain(config: SimConfig) -> float:
    """Large-scale gain: the configured override, or the log-distance model."""
    if config.G_override is not None:
        return float(config.G_override)
    geometry = LinkGeometry(f_c=config.f_c, d=config.d, eta=config.eta,
                            B=config.B, N0=config.N0 or 0.0)
    return large_scale_gain(geometry)


@dataclass(frozen=True)
class TrialOutcome:
    """Measures for one transmitted transport block."""

    measures: metrics.RadioMeasures
    classification_error: float
    crc_ok: bool
    equalization_failed: bool


@dataclass(frozen=True)
class SweepRecord:
    """One output.csv row: aggregated measures for one noise power."""

    noise_power: float
    snr_tx_db: float
    ebn0_tx_db: float
    channel_mse: float
    bler: float
    ser: float
    ber: float
    classification_error: float
    detector: str
    estimator: str
    seed: int


def _detector_features(config: SimConfig, s_flat: np.ndarray, y: np.ndarray) -> np.ndarray:
    if config.dnn_features == "raw":
        return np.concatenate([y.real.T, y.imag.T], axis=1)
    return np.column_stack([s_flat.real, s_flat.imag])


def _detect_indices(config: SimConfig, s_flat: np.ndarray, y: np.ndarray,
                    table: ConstellationTable, dnn_model: Network | None) -> np.ndarray:
    if config.detector == "ml":
        return detect_ml(s_flat, table).indices
    if config.detector == "kmeans":
        return detect_kmeans(s_flat, table).indices
    if dnn_model is None:
        raise ValueError(
            "detector 'dnn' needs a trained network; pass dnn_model or use "
            "train_detector_network() / run_sweep()"
        )
    return predict(dnn_model, _detector_features(config, s_flat, y))


def run_trial(config: SimConfig, noise_power: float, trial_index: int,
              noise_index: int = 0, *, table: ConstellationTable | None = None,
              crc_spec: CrcSpec | None = None, payload_bits=None,
              dnn_model: Network | None = None) -> TrialOutcome:
    """Transmit one transport block end to end and measure it.

    Randomness comes from the substream (seed, noise_index, trial_index);
    within a trial the draw order is fixed: payload bits (when not
    supplied), channel matrix, pilot construction, pilot noise, data noise.
    ``payload_bits`` may hold at most ``codeword_size`` bits (shorter
    chunks are zero-padded by the framing layer).
    """
    if table is None:
        table = build_constellation(config.constellation, config.M_constellation)
    if crc_spec is None:
        crc_spec = CrcSpec(config.crc_generator)
    rng = substream(config.seed, _TRIAL_NS, noise_index, trial_index)
    if payload_bits is None:
        payload_bits = rng.integers(0, 2, size=config.codeword_size, dtype=np.uint8)
    else:
        payload_bits = np.asarray(payload_bits, dtype=np.uint8).ravel()
        if not 0 < payload_bits.size <= config.codeword_size:
            raise ValueError(
                f"a trial transmits one block: payload chunk of {payload_bits.size} bits "
                f"must hold 1..codeword_size = {config.codeword_size} bits"
            )
    block = build_transport_blocks(payload_bits, config.codeword_size, crc_spec,
                                   table.k, config.N_t)[0]

    gain = link_gain(config)
    h = sample_channel(config.N_r, config.N_t, rng)
    realization = ChannelRealization.from_matrix(h, gain, noise_power)

    x_p = build_pilot_matrix(config.N_t, config.n_pilot, rng, config.pilot_mode)
    pilots = PilotBlock(X_P=x_p, Y_P=transmit_pilots(realization, x_p, rng),
                        n_pilot=config.n_pilot)
    if config.estimator == "ls":
        h_hat = estimate_ls(pilots.Y_P, pilots.X_P, gain)
    else:
        h_hat = estimate_lmmse(pilots.Y_P, pilots.X_P, gain, noise_power)
    err_vec = metrics.error_vector(h, h_hat)
    est_mse = metrics.estimation_mse(err_vec, config.N_r, config.N_t)
    snr_db = metrics.tx_snr_db(noise_power, config.N_t)
    ebn0_db = metrics.tx_ebn0_db(noise_power, config.N_t, table.k)

    tx_indices = map_bits_to_symbols(block.bits(), table)
    x = table.points[tx_indices].reshape(-1, config.N_t).T / math.sqrt(config.N_t)
    y = apply_channel(realization, x, rng)

    try:
        if config.equalizer == "zf":
            equalized = equalize_zf(h_hat, gain, y)
        else:
            equalized = equalize_lmmse(h_hat, gain, noise_power, y)
    except np.linalg.LinAlgError:
        # rank-deficient estimate: count the whole block as lost
        measures = metrics.RadioMeasures(
            error_vector=err_vec, estimation_mse=est_mse, tx_snr_db=snr_db,
            tx_ebn0_db=ebn0_db, bler=1.0, ser=1.0, ber=1.0,
        )
        return TrialOutcome(measures=measures, classification_error=1.0,
                            crc_ok=False, equalization_failed=True)

    s_flat = (equalized.s_hat * math.sqrt(config.N_t)).T.ravel()
    rx_indices = _detect_indices(config, s_flat, y, table, dnn_model)
    rx_bits = symbols_to_bits(rx_indices, table)
    payload_rx, crc_ok = extract_and_check(rx_bits, config.codeword_size, crc_spec,
                                           table.k, config.N_t)

    measures = metrics.RadioMeasures(
        error_vector=err_vec,
        estimation_mse=est_mse,
        tx_snr_db=snr_db,
        tx_ebn0_db=ebn0_db,
        bler=0.0 if crc_ok else 1.0,
        ser=metrics.ser(tx_indices, rx_indices),
        ber=metrics.ber(block.payload_bits, payload_rx),
    )
    return TrialOutcome(
        measures=measures,
        classification_error=metrics.classification_error(tx_indices, rx_indices),
        crc_ok=crc_ok,
        equalization_failed=False,
    )


def train_detector_network(config: SimConfig, noise_power: float, noise_index: int = 0,
                           *, table: ConstellationTable | None = None) -> Network:
    """Train the neural detector for one noise point.

    Training data is generated with a dedicated substream, one fresh
    channel per block, through the same pilot/estimate/equalize pipeline
    the trials use. Labels follow ``config.dnn_labels``: the transmitted
    indices ("truth") or the ML detector's decisions ("ml").
    """
    if table is None:
        table = build_constellation(config.constellation, config.M_constellation)
    data_rng = substream(config.seed, _TRAINING_NS, noise_index, 0)
    gain = link_gain(config)
    crc_spec = CrcSpec(config.crc_generator)
    symbols_per_block = build_transport_blocks(
        np.zeros(config.codeword_size, dtype=np.uint8), config.codeword_size,
        crc_spec, table.k, config.N_t,
    )[0].symbols_per_block

    features, labels = [], []
    collected = 0
    while collected < config.dnn_train_samples:
        h = sample_channel(config.N_r, config.N_t, data_rng)
        realization = ChannelRealization.from_matrix(h, gain, noise_power)
        x_p = build_pilot_matrix(config.N_t, config.n_pilot, data_rng, config.pilot_mode)
        y_p = transmit_pilots(realization, x_p, data_rng)
        if config.estimator == "ls":
            h_hat = estimate_ls(y_p, x_p, gain)
        else:
            h_hat = estimate_lmmse(y_p, x_p, gain, noise_power)
        tx_indices = data_rng.integers(0, table.M, size=symbols_per_block)
        x = table.points[tx_indices].reshape(-1, config.N_t).T / math.sqrt(config.N_t)
        y = apply_channel(realization, x, data_rng)
        try:
            if config.equalizer == "zf":
                equalized = equalize_zf(h_hat, gain, y)
            else:
                equalized = equalize_lmmse(h_hat, gain, noise_power, y)
        except np.linalg.LinAlgError:
            continue
        s_flat = (equalized.s_hat * math.sqrt(config.N_t)).T.ravel()
        features.append(_detector_features(config, s_flat, y))
        if config.dnn_labels == "truth":
            labels.append(tx_indices)
        else:
            labels.append(detect_ml(s_flat, table).indices)
        collected += symbols_per_block

    X = np.concatenate(features)[:config.dnn_train_samples]
    y_train = np.concatenate(labels)[:config.dnn_train_samples]
    training_set = TrainingSet(features=X, labels=y_train, label_source=config.dnn_labels)

    init_seed = int(np.random.SeedSequence(
        config.seed, spawn_key=(_TRAINING_NS, noise_index, 1)).generate_state(1)[0])
    spec = NetworkSpec(depth=config.dnn_depth, width=config.dnn_width,
                       input_dim=X.shape[1], output_dim=table.M, seed=init_seed)
    network = init_network(spec)
    hyper = Hyperparameters(
        learning_rate=config.dnn_learning_rate,
        batch_size=config.dnn_batch_size,
        epochs=config.dnn_epochs,
        validation_fraction=config.dnn_validation_fraction,
        patience=config.dnn_patience,
    )
    train(network, training_set, hyper)
    return network


def run_sweep(config: SimConfig) -> list[SweepRecord]:
    """Run n_transmissions trials at each noise power and aggregate.

    Records come out ordered by noise power ascending. With
    detector = "dnn" the network is trained once per noise point before
    the trials; if that training diverges, the noise point falls back to
    ML detection for the radio measures and its record carries
    classification_error = 1.
    """
    validate_config(config)
    table = build_constellation(config.constellation, config.M_constellation)
    crc_spec = CrcSpec(config.crc_generator)

    payload_chunks = None
    if config.payload is not None:
        bits = load_payload_bits(config.payload)
        if bits.size == 0:
            raise ConfigError(f"payload file {config.payload!r} contains no data")
        n_chunks = math.ceil(bits.size / config.codeword_size)
        payload_chunks = [
            bits[i * config.codeword_size:(i + 1) * config.codeword_size]
            for i in range(n_chunks)
        ]

    records = []
    for noise_index, sigma2 in enumerate(config.noise_power):
        trial_config = config
        forced_class_error = None
        dnn_model = None
        if config.detector == "dnn":
            try:
                dnn_model = train_detector_network(config, sigma2, noise_index, table=table)
            except TrainingDivergedError as exc:
                log.warning(
                    "noise point %g: %s; falling back to ML detection and "
                    "recording classification_error = 1", sigma2, exc,
                )
                trial_config = replace(config, detector="ml")
                forced_class_error = 1.0

        def one_trial(trial_index: int, _cfg=trial_config, _model=dnn_model,
                      _noise=sigma2, _idx=noise_index) -> TrialOutcome:
            chunk = None
            if payload_chunks is not None:
                chunk = payload_chunks[trial_index % len(payload_chunks)]
            return run_trial(_cfg, _noise, trial_index, _idx, table=table,
                             crc_spec=crc_spec, payload_bits=chunk, dnn_model=_model)

        n = config.n_transmissions
        if config.workers > 1:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                outcomes = list(pool.map(one_trial, range(n)))
        else:
            outcomes = [one_trial(t) for t in range(n)]

        # ordered reduction keyed by trial index (outcomes is already ordered)
        def mean(values):
            return float(np.mean(values))

        records.append(SweepRecord(
            noise_power=sigma2,
            snr_tx_db=metrics.tx_snr_db(sigma2, config.N_t),
            ebn0_tx_db=metrics.tx_ebn0_db(sigma2, config.N_t, table.k),
            channel_mse=mean([o.measures.estimation_mse for o in outcomes]),
            bler=mean([o.measures.bler for o in outcomes]),
            ser=mean([o.measures.ser for o in outcomes]),
            ber=mean([o.measures.ber for o in outcomes]),
            classification_error=(
                forced_class_error if forced_class_error is not None
                else mean([o.classification_error for o in outcomes])
            ),
            detector=config.detector,
            estimator=config.estimator,
            seed=config.seed,
        ))
    return records


def _format_field(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(records: list[SweepRecord], path) -> None:
    """Write records as UTF-8 CSV with LF endings and round-trip-exact floats."""
    if not records:
        raise ValueError("no records to write")
    lines = [",".join(CSV_COLUMNS)]
    for record in records:
        lines.append(",".join(_format_field(getattr(record, col)) for col in CSV_COLUMNS))
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")


def write_extract(records: list[SweepRecord], columns, path) -> None:
    """Write a column subset (e.g. snr_tx_db,bler) for external plotting."""
    if not records:
        raise ValueError("no records to write")
    columns = tuple(columns)
    unknown = [c for c in columns if c not in CSV_COLUMNS]
    if unknown:
        raise ValueError(f"unknown column(s): {', '.join(unknown)}; valid: {', '.join(CSV_COLUMNS)}")
    if not columns:
        raise ValueError("no columns selected")
    lines = [",".join(columns)]
    for record in records:
        lines.append(",".join(_format_field(getattr(record, col)) for col in columns))
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")
