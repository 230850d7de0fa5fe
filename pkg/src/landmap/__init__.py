"""Probably-approximately-correct map learning on landmark graphs."""
from .graph import (
    GraphError, LabeledGraph, LandmarkPartition, all_landmarks, build_graph, degree,
    labels_at, landmark_parameter, load_world, make_partition, neighbor,
    oracle_shortest_path, partition_from_landmarks, replay, save_world,
)
from .generators import LandmarkPlan, gen_building, gen_grid, gen_random_landmark_graph
from .learner import (
    CandidatePath, LearnParams, filter_candidates, filter_with_reverse_certainty,
    identify_landmarks, learn_global, learn_local, num_filter_traversals,
    num_selection_attempts, select_candidates,
)
from .maps import (
    LearnedMap, deserialize_map, global_path_query, load_map, save_map,
    serialize_map, stretch_ratio,
)
from .rng import substream
from .world import MovementModel, Robot, SensorSuite, World

__version__ = "0.1.0"
