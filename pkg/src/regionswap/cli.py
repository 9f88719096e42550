"""Command line: dataset preparation, training, inference and serving.

Exit codes: 0 success, 1 usage error (bad flags/arguments), 2 runtime
failure (missing data, numerical aborts, I/O problems).
"""
from __future__ import annotations

import dataclasses
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .config import dump_config, load_config, load_preset, preset_names
from .images import load_image, resize_image, save_png

CKPT_OPTION = click.option(
    "--ckpt",
    envvar="RSGAN_CKPT",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="Trained model checkpoint (defaults to $RSGAN_CKPT).",
)
SPLITTER_OPTION = click.option(
    "--splitter",
    type=click.Choice(["auto", "disk", "window"]),
    default="auto",
    show_default=True,
    help="How to split a plain photo into face and hair regions.",
)


@click.group()
@click.version_option(__version__, prog_name="regionswap")
def cli() -> None:
    """Region-separated face generation: swap, edit, sample, serve."""


def _load_engine(ckpt: str, splitter: str):
    from .apps.inference import Engine

    return Engine.from_checkpoint(ckpt, splitter=splitter)


def _load_unit(engine, path: str) -> np.ndarray:
    img = load_image(path)
    s = engine.resolution
    if img.shape[:2] != (s, s):
        click.echo(f"note: resizing {path} to {s}x{s}", err=True)
        img = resize_image(img, s)
    return img.astype(np.float32)


@cli.command("prepare-dataset")
@click.option("--images", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--landmarks", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--attrs", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--masks", default=None, type=click.Path(exists=True, file_okay=False))
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.option("--resolution", default=128, show_default=True)
@click.option("--train-count", default=None, type=int,
              help="Samples in the train split (rest become the test split).")
def prepare_dataset(images, landmarks, attrs, masks, out, resolution, train_count):
    """Crop, mask and resize photographs into a training directory."""
    from .data.build import build_photo_dataset

    report = build_photo_dataset(
        images, landmarks, out, resolution,
        masks_dir=masks, attrs_path=attrs, train_count=train_count,
    )
    click.echo(
        f"built {report.built}/{report.total} samples -> {out} "
        f"(train {len(report.train)}, test {len(report.test)}; skipped: "
        f"{report.skipped_no_landmarks} landmarks, {report.skipped_no_mask} masks, "
        f"{report.skipped_no_attrs} attrs)"
    )


@cli.command("synth-dataset")
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.option("--resolution", default=32, show_default=True)
@click.option("--count", default=512, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--train-count", default=None, type=int)
def synth_dataset(out, resolution, count, seed, train_count):
    """Generate the two-factor synthetic corpus."""
    from .data.build import build_synthetic_dataset

    report = build_synthetic_dataset(
        out, resolution=resolution, n_samples=count, seed=seed, train_count=train_count
    )
    click.echo(
        f"built {report.built} samples -> {out} "
        f"(train {len(report.train)}, test {len(report.test)})"
    )


@cli.command()
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--preset", default=None, type=click.Choice(preset_names()))
@click.option("--data", default=None, type=click.Path(exists=True, file_okay=False))
@click.option("--out", default=None, type=click.Path(file_okay=False))
@click.option("--steps", default=None, type=int, help="Override the configured step count.")
@click.option("--resume", is_flag=True, help="Continue from the checkpoint in --out.")
@click.option("--dry-run", is_flag=True, help="Print the resolved config as TOML and stop.")
def train(config_path, preset, data, out, steps, resume, dry_run):
    """Train a model on a prepared dataset directory."""
    if (config_path is None) == (preset is None):
        raise click.UsageError("provide exactly one of --config or --preset")
    cfg = load_config(config_path) if config_path else load_preset(preset)
    if steps is not None:
        cfg = dataclasses.replace(cfg, train=dataclasses.replace(cfg.train, steps=steps))
    if dry_run:
        click.echo(dump_config(cfg), nl=False)
        return
    if data is None or out is None:
        raise click.UsageError("--data and --out are required to train")

    from .checkpoint import load_checkpoint
    from .data.manifest import DiskDataset
    from .training import Trainer, initialize

    dataset = DiskDataset(data, split="train")
    if len(dataset) == 0:
        raise click.ClickException(f"dataset at {data} has an empty train split")
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    ckpt_path = out_dir / "model.ckpt"
    if resume and ckpt_path.exists():
        state = load_checkpoint(ckpt_path)
    else:
        state = initialize(cfg, dataset.attr_names)
    trainer = Trainer(state, dataset, log_path=out_dir / "train_log.jsonl")

    def report(step: int, record: dict[str, float]) -> None:
        click.echo(f"step {step}: total {record['total']:.4f} rec {record['rec']:.4f}")

    remaining = max(cfg.train.steps - state.step, 0)
    trainer.train(remaining, checkpoint_path=ckpt_path, on_log=report)
    click.echo(f"checkpoint at step {state.step}: {ckpt_path}")


@cli.command()
@click.option("--source", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--target", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--gd", is_flag=True,
              help="Composite the swapped face into the target in the gradient domain.")
@CKPT_OPTION
@SPLITTER_OPTION
def swap(source, target, out, gd, ckpt, splitter):
    """Render the source's face in the target's hair and background."""
    engine = _load_engine(ckpt, splitter)
    src = _load_unit(engine, source)
    tgt = _load_unit(engine, target)
    result = engine.swap_gd(src, tgt) if gd else engine.swap(src, tgt)
    save_png(result, out)
    click.echo(out)


def _parse_updates(pairs: tuple[str, ...]) -> dict[str, float]:
    updates = {}
    for pair in pairs:
        name, sep, raw = pair.partition("=")
        if not sep or not name:
            raise click.UsageError(f"--set expects name=value, got {pair!r}")
        try:
            updates[name] = float(raw)
        except ValueError:
            raise click.UsageError(f"--set {name}: {raw!r} is not a number") from None
    return updates


@cli.command()
@click.option("--image", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--set", "assignments", multiple=True, metavar="NAME=VALUE",
              help="Attribute override in [0, 1]; repeatable.")
@click.option("--region", type=click.Choice(["face", "hair", "both"]),
              default="both", show_default=True)
@CKPT_OPTION
@SPLITTER_OPTION
def edit(image, out, assignments, region, ckpt, splitter):
    """Re-render an image with chosen attributes overridden."""
    engine = _load_engine(ckpt, splitter)
    img = _load_unit(engine, image)
    result = engine.edit(img, _parse_updates(assignments), region=region)
    save_png(result, out)
    click.echo(out)


@cli.command()
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--count", default=8, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--vary", type=click.Choice(["face", "hair", "both"]),
              default="both", show_default=True)
@click.option("--base", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Keep this image's un-varied parts.")
@CKPT_OPTION
@SPLITTER_OPTION
def sample(out_dir, count, seed, vary, base, ckpt, splitter):
    """Draw face/hair parts from the prior and render them."""
    engine = _load_engine(ckpt, splitter)
    base01 = _load_unit(engine, base) if base else None
    images = engine.sample_parts(count, seed=seed, vary=vary, base01=base01)
    out_root = Path(out_dir)
    out_root.mkdir(parents=True, exist_ok=True)
    for i, img in enumerate(images):
        save_png(img, out_root / f"sample{i:03d}.png")
    click.echo(f"{len(images)} images -> {out_root}")


@cli.command()
@click.option("--a", "a_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--b", "b_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--steps", default=8, show_default=True)
@click.option("--vary", type=click.Choice(["face", "hair", "both"]),
              default="both", show_default=True)
@CKPT_OPTION
@SPLITTER_OPTION
def interpolate(a_path, b_path, out_dir, steps, vary, ckpt, splitter):
    """Walk the latent line between two images."""
    engine = _load_engine(ckpt, splitter)
    frames = engine.interpolate(
        _load_unit(engine, a_path), _load_unit(engine, b_path), steps=steps, vary=vary
    )
    out_root = Path(out_dir)
    out_root.mkdir(parents=True, exist_ok=True)
    for i, img in enumerate(frames):
        save_png(img, out_root / f"frame{i:03d}.png")
    click.echo(f"{len(frames)} frames -> {out_root}")


@cli.command()
@click.option("--data", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--pairs", default=50, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--method", default="model", show_default=True,
              help="Row label in the report table.")
@click.option("--json", "json_path", default=None, type=click.Path(dir_okay=False),
              help="Also write the full report as JSON.")
@click.option("--csv", "csv_path", default=None, type=click.Path(dir_okay=False),
              help="Also write per-pair values as CSV.")
@CKPT_OPTION
@SPLITTER_OPTION
def evaluate(data, pairs, seed, method, json_path, csv_path, ckpt, splitter):
    """Swap-consistency benchmark over the dataset's test split."""
    from .data.manifest import DiskDataset
    from .images import to_unit
    from .metrics import ProbeEmbedder, run_benchmark

    engine = _load_engine(ckpt, splitter)
    dataset = DiskDataset(data, split="test")
    images = [to_unit(dataset.load(name)["x"]) for name in dataset.names]
    report = run_benchmark(
        swapper=engine.swap,
        reconstructor=engine.reconstruct,
        embedder=ProbeEmbedder(),
        images=images,
        n_pairs=pairs,
        seed=seed,
        method=method,
    )
    click.echo(report.to_text())
    if json_path:
        Path(json_path).write_text(report.to_json())
    if csv_path:
        Path(csv_path).write_text(report.to_csv())


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--max-bytes", default=8_000_000, show_default=True,
              help="Reject request images larger than this many bytes.")
@click.option("--timeout", default=0.0, show_default=True,
              help="Per-request deadline in seconds; 0 disables.")
@CKPT_OPTION
@SPLITTER_OPTION
def serve(host, port, max_bytes, timeout, ckpt, splitter):
    """Run the inference HTTP service."""
    import uvicorn

    from .service import create_app

    app = create_app(ckpt, splitter=splitter, max_bytes=max_bytes, timeout_seconds=timeout)
    uvicorn.run(app, host=host, port=port, log_level="warning")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:  # --help/--version paths
        return int(exc.exit_code)
    except click.UsageError as exc:
        exc.show(file=sys.stderr)
        return 1
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 2
    except click.Abort:
        click.echo("aborted", err=True)
        return 2
    except Exception as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
