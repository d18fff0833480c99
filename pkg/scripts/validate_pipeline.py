"""Run the smoke config twice into scratch directories and compare the reports byte for byte."""

import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))
sys.path.insert(0, str(ROOT))

from helpers.logger import setup_logger  # noqa: E402
from adrsignal.pipeline import load_pipeline_config, run_stage  # noqa: E402

REPORT_FILES = ("report/report.json", "report/report.txt", "report/candidates.csv")


def main(config_path: Path = ROOT / "configs" / "smoke.toml"):
    setup_logger("adrsignal")
    with tempfile.TemporaryDirectory() as scratch:
        runs = [Path(scratch) / name for name in ("a", "b")]
        for out in runs:
            config = load_pipeline_config(config_path, {"paths": {"out": str(out)}})
            run_stage("all", config)

        same = all((runs[0] / rel).read_bytes() == (runs[1] / rel).read_bytes() for rel in REPORT_FILES)
        print((runs[0] / "report" / "report.txt").read_text(encoding="utf-8"))
        print("stages", sorted(p.name for p in runs[0].iterdir() if p.is_dir()))
        print("identical reports", same)
    return 0 if same else 1


if __name__ == "__main__":
    sys.exit(main(Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "configs" / "smoke.toml"))
