"""Adversarial training loops: single-discriminator baseline and the
dual-discriminator family (log/linear pair, alpha pair, arbitrary pair).

An "epoch" is one optimizer round trip on fresh batches from the infinite
sampler: one joint ascent step for the discriminator(s), then one descent
step for the generator. Each run owns four independent RNG streams
(data / noise / metrics / init), so metric cadence never perturbs the
parameter trajectory, and checkpoints capture every stream's state for
bit-identical resumption.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .data import (
    RingSpec,
    run_streams,
    sample_noise,
    sample_ring,
    write_samples_csv,
)
from .losses import (
    LossPair,
    alpha_pair,
    d2_pair,
    loss_from_descriptor,
    loss_value_and_input_grad,
    make_loss_pair,
)
from .metrics import DegenerateSampleError, mode_coverage, symmetric_kl, wasserstein
from .nn import AdamState, LayerSpec, Network, adam_step, backward_cached, forward, forward_cached, init_network

MODELS = ("vanilla", "d2", "d2alpha", "d2general")
CHECKPOINT_VERSION = 1
METRIC_HEADER = ("epoch", "sym_kl", "wasserstein", "modes_covered", "hq_fraction", "value_fn")

_P_MIN = 1e-12  # probability clip for the sigmoid baseline


class ConfigError(ValueError):
    """Invalid training configuration."""


class TrainingDivergedError(RuntimeError):
    """Loss stayed non-finite for 10 consecutive steps."""


class CheckpointFormatError(RuntimeError):
    """Checkpoint missing, corrupt, or from an incompatible writer."""


@dataclass(frozen=True)
class TrainConfig:
    model: str = "d2alpha"
    alpha1: float = 0.6
    alpha2: float = 0.9
    loss1: "dict | None" = None  # d2general descriptors
    loss2: "dict | None" = None
    c1: float = 0.01
    c2: float = 1.5
    lr: float = 0.001
    batch_size: int = 512
    epochs: int = 25000
    seed: int = 712
    noise_dim: int = 256
    snapshot_every: int = 5000
    metric_every: int = 250
    checkpoint_every: int = 0  # 0: final checkpoint only
    nonsaturating: bool = False  # vanilla-only generator heuristic
    hidden: int = 128
    n_metric_samples: int = 1000
    n_wasserstein: int = 512
    n_snapshot_samples: int = 1000
    ring_modes: int = 8
    ring_radius: float = 2.0
    ring_covariance: float = 0.02

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.model == "d2alpha":
            if self.alpha1 <= 0 or self.alpha2 <= 0:
                raise ConfigError("alpha1 and alpha2 must be positive")
            if self.alpha2 <= self.alpha1:
                raise ConfigError(
                    f"d2alpha requires alpha2 > alpha1 (optimal discriminators "
                    f"exist only there), got alpha1={self.alpha1} alpha2={self.alpha2}"
                )
            if 1.0 in (self.alpha1, self.alpha2):
                raise ConfigError("alpha == 1 is the d2 model's log loss; use model='d2'")
        if self.model == "d2general":
            if self.loss1 is None or self.loss2 is None:
                raise ConfigError("d2general requires loss1 and loss2 descriptors")
            make_loss_pair(self.loss1, self.loss2)  # validates
        if self.model != "vanilla" and (self.c1 <= 0 or self.c2 <= 0):
            raise ConfigError("c1 and c2 must be positive")
        if self.nonsaturating and self.model != "vanilla":
            raise ConfigError("the non-saturating heuristic applies to vanilla only")
        if self.batch_size < 2:
            raise ConfigError("batch_size must be >= 2")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.lr <= 0:
            raise ConfigError("lr must be positive")
        if self.noise_dim < 1:
            raise ConfigError("noise_dim must be >= 1")
        for name in ("snapshot_every", "metric_every"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")

    @property
    def ring(self) -> RingSpec:
        return RingSpec(self.ring_modes, self.ring_radius, self.ring_covariance)

    def pair(self) -> "LossPair | None":
        if self.model == "vanilla":
            return None
        if self.model == "d2":
            return d2_pair()
        if self.model == "d2alpha":
            return alpha_pair(self.alpha1, self.alpha2)
        return make_loss_pair(self.loss1, self.loss2)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TrainConfig":
        return cls(**json.loads(text))

    def content_hash(self) -> str:
        """Hash of every field except `epochs`, which a resume may extend."""
        d = asdict(self)
        d.pop("epochs")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()


@dataclass(frozen=True)
class MetricRow:
    epoch: int
    sym_kl: float
    wasserstein: float
    modes_covered: int
    hq_fraction: float
    value_fn: float

    def as_csv(self) -> "list[str]":
        return [
            str(self.epoch),
            repr(self.sym_kl),
            repr(self.wasserstein),
            str(self.modes_covered),
            repr(self.hq_fraction),
            repr(self.value_fn),
        ]


@dataclass
class RunRecord:
    config: TrainConfig
    rows: "list[MetricRow]"
    snapshot_files: "list[str]"
    checkpoint_file: str
    run_dir: str

    def write_metrics_csv(self) -> Path:
        path = Path(self.run_dir) / "metrics.csv"
        with open(path, "w") as fh:
            fh.write(",".join(METRIC_HEADER) + "\n")
            for row in self.rows:
                fh.write(",".join(row.as_csv()) + "\n")
        return path


def load_metric_rows(run_dir) -> "list[MetricRow]":
    path = Path(run_dir) / "metrics.csv"
    rows = []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != METRIC_HEADER:
            raise ValueError(f"unexpected metrics header {header!r}")
        for line in fh:
            e, sk, w, mc, hq, v = line.strip().split(",")
            rows.append(MetricRow(int(e), float(sk), float(w), int(mc), float(hq), float(v)))
    return rows


# --------------------------------------------------------------------------
# networks


def net_keys(model: str) -> "tuple[str, ...]":
    return ("g", "d") if model == "vanilla" else ("g", "d1", "d2")


def build_networks(cfg: TrainConfig, rng: np.random.Generator) -> "dict[str, Network]":
    h = cfg.hidden
    g = init_network(
        [
            LayerSpec(cfg.noise_dim, h, "relu"),
            LayerSpec(h, h, "relu"),
            LayerSpec(h, 2, "identity"),
        ],
        rng,
    )
    if cfg.model == "vanilla":
        d = init_network([LayerSpec(2, h, "relu"), LayerSpec(h, 1, "sigmoid")], rng)
        return {"g": g, "d": d}
    d1 = init_network([LayerSpec(2, h, "relu"), LayerSpec(h, 1, "softplus")], rng)
    d2 = init_network([LayerSpec(2, h, "relu"), LayerSpec(h, 1, "softplus")], rng)
    return {"g": g, "d1": d1, "d2": d2}


# --------------------------------------------------------------------------
# value function and gradients


def _safe_log(p: np.ndarray) -> np.ndarray:
    return np.log(np.clip(p, _P_MIN, None))


def _vanilla_terms(p_real, p_fake):
    pr = np.clip(p_real, _P_MIN, 1.0 - _P_MIN)
    pf = np.clip(p_fake, _P_MIN, 1.0 - _P_MIN)
    value = float(np.mean(np.log(pr)) + np.mean(np.log1p(-pf)))
    in_r = (p_real > _P_MIN) & (p_real < 1.0 - _P_MIN)
    in_f = (p_fake > _P_MIN) & (p_fake < 1.0 - _P_MIN)
    dreal = np.where(in_r, 1.0 / pr, 0.0) / p_real.size
    dfake = np.where(in_f, -1.0 / (1.0 - pf), 0.0) / p_fake.size
    return value, dreal, dfake


def explicit_value_and_grads(
    cfg: TrainConfig,
    nets: "dict[str, Network]",
    real: np.ndarray,
    fake: np.ndarray,
    want_d: bool = True,
    want_fake_grad: bool = False,
) -> "tuple[float, dict[str, np.ndarray], np.ndarray | None]":
    """Batch value for explicit real and fake sample batches.

    Returns (value, discriminator_grads, d(value)/d(fake)). Feeding real
    draws in as `fake` evaluates the value floor at matched distributions.
    """
    real = np.asarray(real, dtype=np.float64)
    fake = np.asarray(fake, dtype=np.float64)
    n, m = real.shape[0], fake.shape[0]
    both = np.vstack([real, fake])
    grads: "dict[str, np.ndarray]" = {}

    if cfg.model == "vanilla":
        out, dcache = forward_cached(nets["d"], both)
        p = out[:, 0]
        value, dreal, dfake = _vanilla_terms(p[:n], p[n:])
        upstream = np.concatenate([dreal, dfake])[:, None]
        pg, dx = backward_cached(nets["d"], dcache, upstream)
        if want_d:
            grads["d"] = pg
        return value, grads, (dx[n:] if want_fake_grad else None)

    pair = cfg.pair()
    l1, l2 = pair.l1, pair.l2
    out1, cache1 = forward_cached(nets["d1"], both)
    out2, cache2 = forward_cached(nets["d2"], both)
    d1, d2 = out1[:, 0], out2[:, 0]
    v11, g11 = loss_value_and_input_grad(l1, d1[:n])  # l1 on real through D1
    v21, g21 = loss_value_and_input_grad(l2, d1[n:])  # l2 on fake through D1
    v22, g22 = loss_value_and_input_grad(l2, d2[:n])  # l2 on real through D2
    v12, g12 = loss_value_and_input_grad(l1, d2[n:])  # l1 on fake through D2
    value = float(
        cfg.c1 * np.mean(-v11)
        + np.mean(v21 - l2.offset)
        + np.mean(v22 - l2.offset)
        + cfg.c2 * np.mean(-v12)
    )
    up1 = np.concatenate([-cfg.c1 / n * g11, g21 / m])[:, None]
    up2 = np.concatenate([g22 / n, -cfg.c2 / m * g12])[:, None]
    pg1, dx1 = backward_cached(nets["d1"], cache1, up1)
    pg2, dx2 = backward_cached(nets["d2"], cache2, up2)
    if want_d:
        grads["d1"], grads["d2"] = pg1, pg2
    return value, grads, (dx1[n:] + dx2[n:] if want_fake_grad else None)


def value_and_grads(
    cfg: TrainConfig,
    nets: "dict[str, Network]",
    real: np.ndarray,
    noise: np.ndarray,
    want_g: bool = True,
    want_d: bool = True,
) -> "tuple[float, dict[str, np.ndarray]]":
    """Batch estimate of the game value and its parameter gradients.

    Expectations become batch means; the generator gradient flows through
    G(z) into every term that consumes fake samples.
    """
    fake, gcache = forward_cached(nets["g"], noise)
    value, grads, dfake = explicit_value_and_grads(
        cfg, nets, real, fake, want_d=want_d, want_fake_grad=want_g
    )
    if want_g:
        grads["g"], _ = backward_cached(nets["g"], gcache, dfake)
    return value, grads


def batch_value_and_grads(cfg: TrainConfig, nets, data_batch, noise_batch):
    """Public full evaluation: value plus gradients for every network."""
    return value_and_grads(cfg, nets, np.asarray(data_batch), np.asarray(noise_batch))


def generator_objective_and_grads(cfg: TrainConfig, nets, noise):
    """The generator's descent objective (the fake-sample terms of the
    value function, or the non-saturating alternative) and its G-gradient."""
    fake, gcache = forward_cached(nets["g"], noise)
    m = fake.shape[0]
    if cfg.model == "vanilla":
        out, dcache = forward_cached(nets["d"], fake)
        p = out[:, 0]
        pf = np.clip(p, _P_MIN, 1.0 - _P_MIN)
        in_f = (p > _P_MIN) & (p < 1.0 - _P_MIN)
        if cfg.nonsaturating:
            value = float(-np.mean(np.log(pf)))
            dfake = np.where(in_f, -1.0 / pf, 0.0) / m
        else:
            value = float(np.mean(np.log1p(-pf)))
            dfake = np.where(in_f, -1.0 / (1.0 - pf), 0.0) / m
        _, dx = backward_cached(nets["d"], dcache, dfake[:, None])
        gg, _ = backward_cached(nets["g"], gcache, dx)
        return value, {"g": gg}
    pair = cfg.pair()
    l1, l2 = pair.l1, pair.l2
    out1, cache1 = forward_cached(nets["d1"], fake)
    out2, cache2 = forward_cached(nets["d2"], fake)
    v21, g21 = loss_value_and_input_grad(l2, out1[:, 0])
    v12, g12 = loss_value_and_input_grad(l1, out2[:, 0])
    value = float(np.mean(v21 - l2.offset) + cfg.c2 * np.mean(-v12))
    _, dx1 = backward_cached(nets["d1"], cache1, (g21 / m)[:, None])
    _, dx2 = backward_cached(nets["d2"], cache2, (-cfg.c2 / m * g12)[:, None])
    gg, _ = backward_cached(nets["g"], gcache, dx1 + dx2)
    return value, {"g": gg}


# --------------------------------------------------------------------------
# checkpointing


def _rng_state_json(gen: np.random.Generator) -> str:
    def clean(obj):
        if isinstance(obj, dict):
            return {k: clean(v) for k, v in obj.items()}
        if isinstance(obj, np.ndarray):
            return {"__array__": obj.tolist(), "dtype": str(obj.dtype)}
        if isinstance(obj, (np.integer,)):
            return int(obj)
        return obj

    return json.dumps(clean(gen.bit_generator.state))


def _restore_rng(state_json: str) -> np.random.Generator:
    def revive(obj):
        if isinstance(obj, dict):
            if "__array__" in obj:
                return np.asarray(obj["__array__"], dtype=obj["dtype"])
            return {k: revive(v) for k, v in obj.items()}
        return obj

    state = revive(json.loads(state_json))
    bg = np.random.Philox()
    bg.state = state
    return np.random.Generator(bg)


def save_checkpoint(path, cfg, epoch, nets, adam, streams, rows, snapshot_files) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "version": np.array(CHECKPOINT_VERSION),
        "epoch": np.array(epoch),
        "config_json": np.array(cfg.to_json()),
        "config_hash": np.array(cfg.content_hash()),
        "rows_json": np.array(
            json.dumps([asdict(r) for r in rows])
        ),
        "snapshots_json": np.array(json.dumps(list(snapshot_files))),
    }
    for key, net in nets.items():
        payload[f"net_{key}_params"] = net.params
        payload[f"net_{key}_layers"] = np.array(
            json.dumps([{"in_dim": s.in_dim, "out_dim": s.out_dim, "activation": s.activation} for s in net.layers])
        )
        payload[f"adam_{key}_m"] = adam[key].m
        payload[f"adam_{key}_v"] = adam[key].v
        payload[f"adam_{key}_meta"] = np.array(
            json.dumps({"lr": adam[key].lr, "step": adam[key].step, "beta1": adam[key].beta1, "beta2": adam[key].beta2, "eps": adam[key].eps})
        )
    for role, gen in streams.items():
        payload[f"rng_{role}"] = np.array(_rng_state_json(gen))
    np.savez(path, **payload)


def load_checkpoint(path) -> dict:
    try:
        with np.load(path, allow_pickle=False) as z:
            data = {k: z[k] for k in z.files}
        version = int(data["version"])
        if version != CHECKPOINT_VERSION:
            raise CheckpointFormatError(f"checkpoint version {version} unsupported")
        cfg = TrainConfig.from_json(str(data["config_json"]))
        keys = net_keys(cfg.model)
        nets = {}
        adam = {}
        for key in keys:
            layers = [LayerSpec(**s) for s in json.loads(str(data[f"net_{key}_layers"]))]
            nets[key] = Network(layers, data[f"net_{key}_params"])
            meta = json.loads(str(data[f"adam_{key}_meta"]))
            adam[key] = AdamState(
                lr=meta["lr"],
                m=data[f"adam_{key}_m"],
                v=data[f"adam_{key}_v"],
                step=meta["step"],
                beta1=meta["beta1"],
                beta2=meta["beta2"],
                eps=meta["eps"],
            )
        streams = {role: _restore_rng(str(data[f"rng_{role}"])) for role in ("data", "noise", "metrics", "init")}
        rows = [MetricRow(**r) for r in json.loads(str(data["rows_json"]))]
        snapshots = json.loads(str(data["snapshots_json"]))
        return {
            "config": cfg,
            "config_hash": str(data["config_hash"]),
            "epoch": int(data["epoch"]),
            "nets": nets,
            "adam": adam,
            "streams": streams,
            "rows": rows,
            "snapshots": snapshots,
        }
    except CheckpointFormatError:
        raise
    except Exception as exc:
        raise CheckpointFormatError(f"unreadable checkpoint {path}: {exc}") from exc


# --------------------------------------------------------------------------
# the loop


def _evaluate_metrics(cfg, nets, epoch, rng) -> MetricRow:
    gen = forward(nets["g"], sample_noise(cfg.n_metric_samples, cfg.noise_dim, rng))
    real = sample_ring(cfg.ring, cfg.n_wasserstein, rng)
    try:
        skl = symmetric_kl(gen, cfg.ring, rng)
    except DegenerateSampleError:
        skl = float("inf")
    w = wasserstein(gen[: cfg.n_wasserstein], real)
    report = mode_coverage(gen, cfg.ring)
    vreal = sample_ring(cfg.ring, cfg.batch_size, rng)
    vnoise = sample_noise(cfg.batch_size, cfg.noise_dim, rng)
    value, _ = value_and_grads(cfg, nets, vreal, vnoise, want_g=False, want_d=False)
    return MetricRow(
        epoch=epoch,
        sym_kl=float(skl),
        wasserstein=float(w),
        modes_covered=int(report.modes_covered),
        hq_fraction=float(report.high_quality_fraction),
        value_fn=float(value),
    )


def _run_loop(cfg, nets, adam, streams, rows, snapshot_files, start_epoch, run_dir) -> RunRecord:
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "config.json").write_text(cfg.to_json())
    ckpt_dir = run_dir / "ckpt"
    dkeys = [k for k in net_keys(cfg.model) if k != "g"]
    nonfinite_streak = 0
    for epoch in range(start_epoch, cfg.epochs + 1):
        real = sample_ring(cfg.ring, cfg.batch_size, streams["data"])
        noise = sample_noise(cfg.batch_size, cfg.noise_dim, streams["noise"])
        d_value, d_grads = value_and_grads(cfg, nets, real, noise, want_g=False, want_d=True)
        for key in dkeys:
            new_params, adam[key] = adam_step(adam[key], nets[key].params, d_grads[key], maximize=True)
            nets[key] = Network(nets[key].layers, new_params)
        noise2 = sample_noise(cfg.batch_size, cfg.noise_dim, streams["noise"])
        g_value, g_grads = generator_objective_and_grads(cfg, nets, noise2)
        new_params, adam["g"] = adam_step(adam["g"], nets["g"].params, g_grads["g"], maximize=False)
        nets["g"] = Network(nets["g"].layers, new_params)

        if not (np.isfinite(d_value) and np.isfinite(g_value)):
            nonfinite_streak += 1
            if nonfinite_streak >= 10:
                raise TrainingDivergedError(
                    f"value non-finite for 10 consecutive steps (epoch {epoch}, "
                    f"d_value={d_value!r}, g_value={g_value!r})"
                )
        else:
            nonfinite_streak = 0

        if epoch % cfg.metric_every == 0:
            rows.append(_evaluate_metrics(cfg, nets, epoch, streams["metrics"]))
        if epoch % cfg.snapshot_every == 0:
            snap = forward(nets["g"], sample_noise(cfg.n_snapshot_samples, cfg.noise_dim, streams["metrics"]))
            name = f"samples_epoch_{epoch}.csv"
            write_samples_csv(run_dir / name, snap)
            snapshot_files.append(name)
        if cfg.checkpoint_every and epoch % cfg.checkpoint_every == 0 and epoch < cfg.epochs:
            save_checkpoint(
                ckpt_dir / f"epoch_{epoch}.npz", cfg, epoch, nets, adam, streams, rows, snapshot_files
            )

    final = ckpt_dir / "final.npz"
    save_checkpoint(final, cfg, cfg.epochs, nets, adam, streams, rows, snapshot_files)
    record = RunRecord(
        config=cfg,
        rows=rows,
        snapshot_files=snapshot_files,
        checkpoint_file=str(final),
        run_dir=str(run_dir),
    )
    record.write_metrics_csv()
    return record


def train(cfg: TrainConfig, run_dir) -> RunRecord:
    """Train from scratch, writing config.json, metrics.csv, sample
    snapshots, and checkpoints under run_dir."""
    streams = run_streams(cfg.seed)
    nets = build_networks(cfg, streams["init"])
    adam = {key: AdamState.fresh(nets[key].params.size, cfg.lr) for key in net_keys(cfg.model)}
    return _run_loop(cfg, nets, adam, streams, [], [], 1, run_dir)


def resume(checkpoint_path, cfg: TrainConfig, run_dir) -> RunRecord:
    """Continue a checkpointed run up to cfg.epochs.

    cfg must match the checkpointed config on every field except epochs
    (verified by content hash); the continuation is bit-identical to an
    uninterrupted run because all RNG streams were checkpointed.
    """
    state = load_checkpoint(checkpoint_path)
    if cfg.content_hash() != state["config_hash"]:
        raise ConfigError(
            "resume config differs from the checkpointed one (only `epochs` may change)"
        )
    if cfg.epochs <= state["epoch"]:
        raise ConfigError(
            f"checkpoint is already at epoch {state['epoch']}; nothing to resume"
        )
    return _run_loop(
        cfg,
        state["nets"],
        state["adam"],
        state["streams"],
        state["rows"],
        state["snapshots"],
        state["epoch"] + 1,
        run_dir,
    )


def default_run_id(cfg: TrainConfig) -> str:
    return f"{cfg.model}_{cfg.seed}_{time.strftime('%Y%m%d-%H%M%S')}"
