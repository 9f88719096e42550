"""Session fixtures shared across CLI, service and acceptance tests."""
import pytest

from regionswap import Config, LossWeights, ModelConfig, TrainConfig
from regionswap.checkpoint import save_checkpoint
from regionswap.data.build import build_synthetic_dataset
from regionswap.data.manifest import DiskDataset
from regionswap.data.synthetic import attr_names
from regionswap.images import save_png
from regionswap.training import Trainer, initialize


def quick_config() -> Config:
    return Config(
        model=ModelConfig(
            resolution=16, n_attr=12, z_face=8, z_hair=8, z_attr_face=4,
            z_attr_hair=4, width=8, max_width=16, patch_stages=2, groups=4,
        ),
        loss=LossWeights(),
        train=TrainConfig(steps=3, batch_size=4, seed=0, log_every=1,
                          checkpoint_every=100),
    )


@pytest.fixture(scope="session")
def quick_data_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("toy16")
    build_synthetic_dataset(root, resolution=16, n_samples=24, seed=0, train_count=16)
    return root


@pytest.fixture(scope="session")
def quick_ckpt(tmp_path_factory, quick_data_dir):
    """A barely-trained 16px model: cheap, structurally complete."""
    path = tmp_path_factory.mktemp("quick") / "model.ckpt"
    state = initialize(quick_config(), attr_names())
    trainer = Trainer(state, DiskDataset(quick_data_dir, split="train"))
    trainer.train(2)
    save_checkpoint(path, state)
    return path


@pytest.fixture(scope="session")
def toy_pngs(tmp_path_factory):
    """Two 16px synthetic portraits saved as PNG files."""
    from regionswap.data.synthetic import render_sample

    root = tmp_path_factory.mktemp("pngs")
    a = render_sample(16, face_hue=0.1, hair_hue=0.6)["x"]
    b = render_sample(16, face_hue=0.7, hair_hue=0.2)["x"]
    save_png(a, root / "a.png")
    save_png(b, root / "b.png")
    return root / "a.png", root / "b.png"
