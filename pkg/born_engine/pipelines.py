import csv
import json
import logging
import sys
from pathlib import Path
from typing import Optional

from born_engine.sim import FitResult

logger = logging.getLogger(__name__)


class ReportPipeline:
    """Writes one report to a file, or to standard output when no path is given"""

    def __init__(self, out_path: Optional[str] = None):
        self.out_path = Path(out_path) if out_path else None
        self.items = []

    def open_run(self):
        """Executed before the first item"""
        if self.out_path is not None:
            self.out_path.parent.mkdir(parents=True, exist_ok=True)
            self.file = open(self.out_path, "w", encoding="utf-8", newline="")
        else:
            self.file = sys.stdout
        self.items = []
        return self

    def process_item(self, item):
        self.items.append(item)
        return item

    def write(self):
        raise NotImplementedError

    def close_run(self):
        """Executed after the last item"""
        self.write()
        if self.out_path is not None:
            self.file.close()
            logger.info(f"Report saved to: {self.out_path}")
        else:
            self.file.flush()
        logger.info(f"Total rows written: {len(self.items)}")


class JsonReportPipeline(ReportPipeline):
    """A single JSON document (schemas already rendered to plain dicts)"""

    def write(self):
        document = self.items[0] if len(self.items) == 1 else self.items
        json.dump(document, self.file, ensure_ascii=False, indent=2)
        self.file.write("\n")


class TrialCsvPipeline(ReportPipeline):
    """outcome,count,frequency,expected,z rows followed by the chi-square row"""

    HEADER = ["outcome", "count", "frequency", "expected", "z"]

    def __init__(self, out_path: Optional[str] = None):
        super().__init__(out_path)
        self.fit: Optional[FitResult] = None

    def process_item(self, fit: FitResult):
        self.fit = fit
        for row in fit.rows:
            super().process_item(row)
        return fit

    def write(self):
        writer = csv.writer(self.file, lineterminator="\n")
        writer.writerow(self.HEADER)
        for row in self.items:
            writer.writerow(
                [str(row.outcome), row.count, f"{row.frequency:.6f}", f"{row.expected:.6f}", f"{row.z:.4f}"]
            )
        chi_square = self.fit.chi_square if self.fit is not None else 0.0
        writer.writerow(["chi_square", f"{chi_square:.6f}", "", "", ""])


class LpScanPipeline(ReportPipeline):
    """One row of weights per exponent p"""

    def __init__(self, out_path: Optional[str] = None, dim: int = 0):
        super().__init__(out_path)
        self.dim = dim

    def write(self):
        writer = csv.writer(self.file, lineterminator="\n")
        writer.writerow(["p"] + [f"w{k + 1}" for k in range(self.dim)])
        for p, weights in self.items:
            writer.writerow([f"{p:g}"] + [str(w) if not isinstance(w, float) else f"{w:.12g}" for w in weights.w])
