import random

import pytest

from privacyguard import (
    Dataset,
    DegenerateSplitError,
    FeatureSchema,
    SchemaError,
    build_schema,
    clean_records,
    encode_dataset,
    encode_record,
    split_dataset,
)
from privacyguard.features import VERB_FEATURE, schema_from_dict, schema_to_dict

from helpers import make_record


# ------------------------------------------------------------------- cleaning

def test_clean_normalizes_verbs():
    records = [make_record(0, "a.example", " get ", 0), make_record(1, "b.example", "Post", 1)]
    cleaned, report = clean_records(records)
    assert [r.req_type for r in cleaned] == ["GET", "POST"]
    assert report.normalized == 2


def test_clean_drops_exact_duplicates_keeps_first():
    rec = make_record(1, "a.example", "POST", 1, {"imp"})
    cleaned, report = clean_records([rec, make_record(0, "b.example", "GET", 0), rec])
    assert len(cleaned) == 2
    assert cleaned[0] == rec
    assert report.duplicates_removed == 1


def test_clean_rejects_out_of_domain_labels():
    bad = make_record(2, "a.example", "GET", 0)
    cleaned, report = clean_records([bad, make_record(1, "b.example", "GET", 0)])
    assert len(cleaned) == 1
    assert report.rejected == 1
    assert report.rejected_records == [bad]


def test_clean_counts_duplicate_after_normalization():
    # "post" normalizes into an exact duplicate of the first row
    a = make_record(1, "a.example", "POST", 1)
    b = make_record(1, "a.example", "post", 1)
    cleaned, report = clean_records([a, b])
    assert len(cleaned) == 1
    assert report.normalized == 1
    assert report.duplicates_removed == 1


def test_clean_is_idempotent():
    records = [
        make_record(1, "a.example", "post", 1, {"imp"}),
        make_record(0, "b.example", "GET", 0),
        make_record(1, "a.example", "POST", 1, {"imp"}),
        make_record(3, "c.example", "GET", 0),
    ]
    once, first = clean_records(records)
    twice, second = clean_records(once)
    assert twice == once
    assert second.normalized == 0
    assert second.duplicates_removed == 0
    assert second.rejected == 0


# --------------------------------------------------------------------- schema

def test_schema_column_order():
    records = [
        make_record(1, "a.example", "POST", 1, {"imp", "appid"}),
        make_record(0, "b.example", "GET", 0, {"domain"}),
    ]
    schema = build_schema(records)
    assert schema.feature_names == (VERB_FEATURE, "is_json", "pl_appid", "pl_domain", "pl_imp")
    assert len(schema) == 5


def test_schema_minimal_when_no_payload_keys():
    schema = build_schema([make_record(0, "a.example", "GET", 0)])
    assert schema.feature_names == (VERB_FEATURE, "is_json")


def test_schema_ignores_record_order():
    records = [
        make_record(1, "a.example", "POST", 1, {"isprebid"}),
        make_record(0, "b.example", "GET", 0, {"appid", "imp"}),
        make_record(0, "c.example", "GET", 1),
    ]
    reference = build_schema(records)
    assert reference.feature_names == (
        VERB_FEATURE, "is_json", "pl_appid", "pl_imp", "pl_isprebid"
    )
    rng = random.Random(11)
    for _ in range(8):
        shuffled = records[:]
        rng.shuffle(shuffled)
        assert build_schema(shuffled) == reference


def test_schema_hash_depends_only_on_names():
    a = build_schema([make_record(0, "a.example", "GET", 0, {"k"})])
    b = build_schema([make_record(1, "z.example", "POST", 1, {"k"})])
    assert a.schema_hash == b.schema_hash
    c = build_schema([make_record(0, "a.example", "GET", 0, {"other"})])
    assert a.schema_hash != c.schema_hash


def test_schema_hash_is_derived_not_supplied():
    schema = FeatureSchema(feature_names=(VERB_FEATURE, "is_json"))
    assert len(schema.schema_hash) == 64
    int(schema.schema_hash, 16)  # hex digest


def test_schema_refuses_unencodable_verbs():
    with pytest.raises(SchemaError):
        build_schema([make_record(0, "a.example", "PUT", 0)])


def test_schema_dict_round_trip():
    schema = build_schema([make_record(0, "a.example", "POST", 1, {"imp"})])
    assert schema_from_dict(schema_to_dict(schema)) == schema


def test_schema_dict_detects_hash_tamper():
    doc = schema_to_dict(build_schema([make_record(0, "a.example", "GET", 0)]))
    doc["schema_hash"] = "0" * 64
    with pytest.raises(SchemaError):
        schema_from_dict(doc)


# ------------------------------------------------------------------- encoding

def test_encode_record_vector_layout():
    schema = build_schema(
        [
            make_record(1, "a.example", "POST", 1, {"isprebid", "domain"}),
            make_record(0, "b.example", "GET", 0, {"appid"}),
        ]
    )
    # columns: GET/POST, is_json, pl_appid, pl_domain, pl_isprebid
    vector, unseen = encode_record(
        make_record(1, "a.example", "POST", 1, {"isprebid", "domain"}), schema
    )
    assert vector == [1, 1, 0, 1, 1]
    assert unseen == frozenset()


def test_encode_get_is_zero():
    schema = build_schema([make_record(0, "a.example", "GET", 0)])
    vector, _ = encode_record(make_record(0, "a.example", "GET", 0), schema)
    assert vector == [0, 0]


def test_encode_unknown_keys_surface_but_do_not_enter_vector():
    schema = build_schema([make_record(0, "a.example", "GET", 0, {"known"})])
    vector, unseen = encode_record(
        make_record(1, "b.example", "POST", 1, {"known", "novel"}), schema
    )
    assert vector == [1, 1, 1]
    assert unseen == frozenset({"novel"})


def test_encode_dataset_aggregates_unseen():
    schema = build_schema([make_record(0, "a.example", "GET", 0)])
    records = [
        make_record(0, "a.example", "GET", 0, {"x"}),
        make_record(1, "b.example", "POST", 1, {"x", "y"}),
    ]
    dataset, report = encode_dataset(records, schema)
    assert dataset.x == [[0, 0], [1, 1]]
    assert dataset.y == [0, 1]
    assert report.unseen_keys == {"x", "y"}
    assert report.unseen_count == 3


# ---------------------------------------------------------------------- split

def _dataset(n, seed=0):
    rng = random.Random(seed)
    x = [[rng.randrange(2), rng.randrange(2)] for _ in range(n)]
    y = [rng.randrange(2) for _ in range(n)]
    schema = FeatureSchema(feature_names=(VERB_FEATURE, "is_json"))
    return Dataset(schema=schema, x=x, y=y)


def test_split_two_thirds_of_90_is_60_30():
    split = split_dataset(_dataset(90), ratio=2 / 3, seed=42)
    assert len(split.x_train) == 60
    assert len(split.x_test) == 30


def test_split_seventy_percent_of_90_is_63_27():
    split = split_dataset(_dataset(90), ratio=0.7, seed=42)
    assert len(split.x_train) == 63
    assert len(split.x_test) == 27


def test_split_deterministic_per_seed():
    a = split_dataset(_dataset(50), ratio=0.7, seed=9)
    b = split_dataset(_dataset(50), ratio=0.7, seed=9)
    c = split_dataset(_dataset(50), ratio=0.7, seed=10)
    assert a.x_train == b.x_train and a.y_test == b.y_test
    assert a.x_train != c.x_train


def test_split_partitions_without_loss():
    dataset = _dataset(37)
    split = split_dataset(dataset, ratio=0.7, seed=3)
    combined = sorted(map(tuple, split.x_train + split.x_test))
    assert combined == sorted(map(tuple, dataset.x))
    assert len(split.y_train) + len(split.y_test) == 37


def test_split_pairs_stay_aligned():
    dataset = _dataset(40, seed=5)
    pairs = {(tuple(v), l) for v, l in zip(dataset.x, dataset.y)}
    split = split_dataset(dataset, ratio=0.5, seed=7)
    for vector, label in zip(split.x_train + split.x_test, split.y_train + split.y_test):
        assert (tuple(vector), label) in pairs


def test_split_records_metadata():
    split = split_dataset(_dataset(10), ratio=0.7, seed=11)
    assert split.seed == 11
    assert split.ratio == 0.7
    assert split.generator == "splitmix64-fisher-yates"


def test_split_stratified_keeps_class_balance():
    x = [[i % 2, 0] for i in range(40)]
    y = [1] * 10 + [0] * 30
    schema = FeatureSchema(feature_names=(VERB_FEATURE, "is_json"))
    split = split_dataset(Dataset(schema, x, y), ratio=0.5, seed=2, stratify=True)
    assert sum(split.y_train) == 5
    assert sum(split.y_test) == 5
    assert len(split.y_train) == 20


def test_split_rejects_bad_ratio():
    with pytest.raises(ValueError):
        split_dataset(_dataset(10), ratio=0.0, seed=1)
    with pytest.raises(ValueError):
        split_dataset(_dataset(10), ratio=1.0, seed=1)


def test_split_rejects_degenerate():
    with pytest.raises(DegenerateSplitError):
        split_dataset(_dataset(1), ratio=0.5, seed=1)
    # floor(3 * 0.01) = 0 train rows
    with pytest.raises(DegenerateSplitError):
        split_dataset(_dataset(3), ratio=0.01, seed=1)
