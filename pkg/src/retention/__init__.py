"""Employee retention planning.

Predicts an employee's stay probability with a small feed-forward network
and searches, with a Sarsa learner over a uniform-cost action catalog, for
the shortest (hence cheapest) intervention sequence lifting that
probability to a target. An exhaustive-search oracle cross-checks plan
optimality on small catalogs.
"""

from .actions import (ActionCatalog, EmployeeAgent, MetaAction, apply_action,
                      load_catalog, validate_catalog)
from .dataset import (EncodedDataset, FeatureCodec, RawRecord, SchemaConfig,
                      StandardizationStats, encode, load_csv,
                      load_preprocessing, save_preprocessing, split,
                      standardize)
from .errors import (ChecksumError, InputError, NumericError, RetentionError,
                     SchemaError, UsageError, VersionError)
from .mlp import (EvalResult, MlpModel, MlpParams, TrainConfig, calculate_s,
                  evaluate, forward, load_model, save_model, train)
from .oracle import bfs_shortest_plan
from .planner import (EpisodeRecord, Plan, PlannerConfig, QTable,
                      choose_action, discretize, extract_plan, load_qtable,
                      q_update, save_qtable, step, train_planner)

__version__ = "0.1.0"
