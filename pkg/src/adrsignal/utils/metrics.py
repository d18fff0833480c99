from prometheus_client import Counter, Histogram, generate_latest

records_ingested_total = Counter(
    "records_ingested_total",
    "Total claims rows ingested into patient records",
)

malformed_rows_total = Counter(
    "malformed_rows_total",
    "Total claims rows rejected during ingestion",
    ["reason"],
)

skipgram_pairs_total = Counter(
    "skipgram_pairs_total",
    "Total (center, context) pairs consumed by skip-gram training",
    ["kind"],
)

training_epochs_total = Counter(
    "training_epochs_total",
    "Total training epochs run",
    ["model"],
)

stage_duration_seconds = Histogram(
    "stage_duration_seconds",
    "Pipeline stage wall time in seconds",
    ["stage"],
)


def latest_metrics():
    return generate_latest()
