"""Skeletal motion representation, kinematics, file I/O and the
synthetic quadruped corpus generator."""

from habitmotion.motion.kinematics import (  # noqa: F401
    compute_velocities,
    fk_sequence,
    forward_kinematics,
    inverse_kinematics,
)
from habitmotion.motion.motion import (  # noqa: F401
    Motion,
    features_to_motion,
    load_motion,
    motion_to_features,
    recompute_velocities,
    save_motion,
)
from habitmotion.motion.skeleton import LIMBS, Skeleton, reference_skeleton  # noqa: F401
from habitmotion.motion.synth import (  # noqa: F401
    PROFILES,
    CategoryParams,
    Corpus,
    CorpusItem,
    build_corpus,
    category_embedding,
    category_params,
    load_corpus,
    synth_generate,
)
