"""The whole construction as one call, and the same thing from the shell.

    python3 -m cuspforms --report text
    python3 -m cuspforms --p 5 --check lie
    python3 -m cuspforms --val-lambda 1      # rejected: below the threshold, exit 2
"""

import subprocess
import sys

from cuspforms.pipeline import PipelineConfig, emit_report, run_pipeline

cfg = PipelineConfig(p=3, n=2, outside_samples=10, conjugations=10, bch_samples=100)
report = run_pipeline(cfg)
print(emit_report(report, "text").decode())

# Same config and seed, same bytes.
again = run_pipeline(PipelineConfig.loads(cfg.dumps()))
print("reproducible:", emit_report(report) == emit_report(again))

res = subprocess.run([sys.executable, "-m", "cuspforms", "--val-lambda", "1"], capture_output=True, text=True)
print("exit status", res.returncode, "|", res.stderr.strip())
