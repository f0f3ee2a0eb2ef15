import numpy as np
import pytest

from habitmotion.embeddings import load_embeddings
from habitmotion.habit import HabitConfig, train_habit
from habitmotion.motion import build_corpus, load_corpus
from habitmotion.vqvae import TrainConfig, VqvaeConfig, train_vqvae


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus3")
    build_corpus("3cat", path, seed=0)
    return path


@pytest.fixture(scope="session")
def corpus(corpus_dir):
    return load_corpus(corpus_dir)


@pytest.fixture(scope="session")
def store(corpus_dir):
    return load_embeddings(corpus_dir / "embeddings.json")


def micro_habit_config(iterations=25):
    return HabitConfig(
        latent_dim=8,
        post_layers=1,
        post_hidden=32,
        post_heads=2,
        flow_layers=4,
        flow_hidden=32,
        iterations=iterations,
        batch_size=8,
        crop_frames=16,
    )


def micro_vqvae_config(iterations=150, **train_overrides):
    model = VqvaeConfig(
        n_joints=21,
        codebook_size=32,
        code_dim=32,
        width=32,
        cond_dim=16,
        habit_dim=8,
        raw_embed_dim=8,
    )
    train = TrainConfig(iterations=iterations, batch_size=16, **train_overrides)
    return model, train


@pytest.fixture(scope="session")
def micro_habit_models(corpus):
    cfg = micro_habit_config()
    return {
        cat: train_habit([it.motion for it in items], cfg, seed=0)
        for cat, items in corpus.by_category("train").items()
    }


@pytest.fixture(scope="session")
def micro_vqvae(corpus, store, micro_habit_models):
    model_cfg, train_cfg = micro_vqvae_config()
    result = train_vqvae(model_cfg, train_cfg, corpus, micro_habit_models, store)
    store.attach_projection(result.model.project_raw)
    return result.model


def unit_quats(rng, shape):
    q = rng.standard_normal(shape + (4,))
    q /= np.linalg.norm(q, axis=-1, keepdims=True)
    return np.where(q[..., 0:1] < 0, -q, q)
