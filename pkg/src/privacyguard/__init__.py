"""Classify outbound HTTP requests as privacy-invasive or benign.

The pipeline runs capture -> screen -> dataset -> train -> evaluate -> serve:
HAR or curl captures become labeled CSV rows, three from-scratch classifiers
learn from the encoded rows, and trained models ship as canonical JSON
bundles that a strict HTTP API serves. The service layer lives in
privacyguard.service and is imported on demand, so library use does not pay
for the web stack.
"""

from .bundle import (
    BundleError,
    MalformedBundleError,
    ModelBundle,
    SchemaHashMismatchError,
    UnsupportedVersionError,
    bundle_for_model,
    dataset_fingerprint,
    load_bundle,
    load_bundle_file,
    model_from_bundle,
    save_bundle,
    save_bundle_file,
)
from .classifiers import (
    DecisionTreeModel,
    LogisticHyper,
    LogisticModel,
    SvmHyper,
    SvmModel,
    TreeHyper,
    hinge_objective,
    log_loss,
    loss_gradient,
    train_decision_tree,
    train_linear_svm,
    train_logistic,
)
from .errors import DataError
from .evaluation import ConfusionMatrix, Metrics, compute_metrics, confusion_matrix
from .features import (
    Dataset,
    DegenerateSplitError,
    FeatureSchema,
    SchemaError,
    SplitDataset,
    build_schema,
    clean_records,
    encode_dataset,
    encode_record,
    split_dataset,
)
from .ingest import (
    CurlParseError,
    DatasetFormatError,
    HarParseError,
    LabeledRecord,
    PayloadProfile,
    RawRequest,
    ScreenVerdict,
    emit_blocklist,
    export_dataset_csv,
    parse_curl_file,
    parse_dataset_csv,
    parse_har,
    profile_payload,
    screen_request,
)

__version__ = "0.1.0"
