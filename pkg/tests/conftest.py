import os
import time
from pathlib import Path

import pytest

from retention import SchemaConfig, TrainConfig, encode, load_csv, split, train

REPO = Path(__file__).resolve().parent.parent
# Point RETENTION_ACCEPTANCE_DATA at the full public attrition CSV to run the
# suite against it instead of the bundled synthetic sample.
DATA_CSV = Path(os.environ.get("RETENTION_ACCEPTANCE_DATA",
                               REPO / "data" / "attrition_sample.csv"))
SCHEMA_YAML = REPO / "configs" / "schema_attrition.yaml"
CATALOG_YAML = REPO / "configs" / "catalog.yaml"
EMPLOYEE_YAML = REPO / "configs" / "example_employee.yaml"


@pytest.fixture(scope="session")
def schema():
    return SchemaConfig.from_file(SCHEMA_YAML)


@pytest.fixture(scope="session")
def sample_records(schema):
    return load_csv(DATA_CSV, schema)


@pytest.fixture(scope="session")
def sample_dataset(schema, sample_records):
    return encode(sample_records, schema)


@pytest.fixture(scope="session")
def sample_split(sample_dataset):
    return split(sample_dataset, 0.8, 0)


@pytest.fixture(scope="session")
def default_training(sample_split):
    """Model trained with stock settings, plus the wall-clock cost of
    training it. Shared across tests; treat as read-only."""
    train_set, test_set = sample_split
    started = time.monotonic()
    model = train(train_set, TrainConfig())
    elapsed = time.monotonic() - started
    return model, test_set, elapsed


@pytest.fixture(scope="session")
def default_model(default_training):
    return default_training[0]
