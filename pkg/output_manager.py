"""
Output directory layout, run summaries and the sweep manifest
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

from mesh import write_mesh_text
from postproc import FIELD_NAMES, profile_filename, write_fields_csv, write_profile_csv, write_vtk
from solver import ExperimentResult

logger = logging.getLogger(__name__)

FIELDS_FILE = "fields.vtk"
FIELDS_CSV_FILE = "fields.csv"
SUMMARY_FILE = "summary.txt"
MANIFEST_FILE = "manifest.csv"
MESH_FILE = "mesh.txt"
MANIFEST_COLUMNS = ("run", "domain", "case", "model", "converged", "iterations",
                    "final_residual", "certificate", "directory", "message")


@dataclass
class ManifestEntry:
    run: str
    domain: str
    case: int
    model: str
    converged: bool
    iterations: int
    final_residual: Optional[float]
    certificate: float
    directory: str
    message: str = ""

    @classmethod
    def from_summary(cls, summary: Dict[str, Any], directory: Union[str, Path]) -> "ManifestEntry":
        return cls(
            run=f"{summary['domain']}_case{summary['case']}_{summary['model']}",
            domain=summary["domain"],
            case=int(summary["case"]),
            model=summary["model"],
            converged=bool(summary["converged"]),
            iterations=int(summary["iterations"]),
            final_residual=summary["final_residual"],
            certificate=float(summary["certificate"]),
            directory=str(directory),
            message=str(summary.get("message", "")),
        )

    def to_row(self) -> str:
        residual = "" if self.final_residual is None else f"{self.final_residual:.6e}"
        return ",".join([self.run, self.domain, str(self.case), self.model,
                         "true" if self.converged else "false", str(self.iterations),
                         residual, f"{self.certificate:.6f}", self.directory,
                         self.message.replace(",", ";")])


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, (list, tuple)):
        return " ".join(_format_value(v) for v in value)
    if value is None:
        return ""
    return str(value)


def read_summary(path: Union[str, Path]) -> Dict[str, str]:
    """key = value pairs of a summary file, as text"""
    result = {}
    for line in Path(path).read_text().splitlines():
        if "=" in line:
            key, value = line.split("=", 1)
            result[key.strip()] = value.strip()
    return result


class OutputManager:
    def __init__(self, outdir: Union[str, Path] = "output"):
        self.outdir = Path(outdir)

    def run_directory(self, label: str) -> Path:
        directory = self.outdir / label
        directory.mkdir(parents=True, exist_ok=True)
        return directory

    def write_summary(self, directory: Path, summary: Dict[str, Any]) -> Path:
        path = directory / SUMMARY_FILE
        with open(path, "w") as f:
            for key, value in summary.items():
                f.write(f"{key} = {_format_value(value)}\n")
        logger.info("Wrote %s", path)
        return path

    def export_result(self, result: ExperimentResult, export_vtk: bool = True,
                      export_csv: bool = True, export_profile: bool = True) -> Dict[str, Any]:
        """Write one run's fields, profiles and summary into its own directory"""
        try:
            directory = self.run_directory(result.label)
            files: List[Path] = []
            if export_vtk and result.fields is not None:
                files.append(write_vtk(result.mesh, result.fields, directory / FIELDS_FILE,
                                       names=[n for n in FIELD_NAMES if n in result.fields]))
            if export_csv and result.fields is not None:
                files.append(write_fields_csv(result.mesh, result.fields, directory / FIELDS_CSV_FILE))
                files.append(write_mesh_text(result.mesh, directory / MESH_FILE))
            if export_profile:
                for profile in result.profiles:
                    files.append(write_profile_csv(profile, directory / profile_filename(profile)))
            summary = result.summary()
            summary["flagged"] = bool(result.fields.flagged) if result.fields is not None else False
            files.append(self.write_summary(directory, summary))
            return {
                "success": True,
                "message": f"Results written to {directory}",
                "directory": directory,
                "files": files,
                "entry": ManifestEntry.from_summary(summary, directory),
            }
        except OSError as e:
            logger.error("Export of %s failed: %s", result.label, e)
            return {"success": False, "message": f"Export failed: {str(e)}"}

    def record_failure(self, label: str, summary: Dict[str, Any]) -> Dict[str, Any]:
        """Summary and manifest entry for a run that stopped before producing fields"""
        try:
            directory = self.run_directory(label)
            path = self.write_summary(directory, summary)
        except OSError as e:
            logger.error("Summary of %s failed: %s", label, e)
            return {"success": False, "message": f"Export failed: {str(e)}"}
        return {
            "success": True,
            "message": f"Failure recorded in {directory}",
            "directory": directory,
            "files": [path],
            "entry": ManifestEntry.from_summary(summary, directory),
        }

    def write_manifest(self, entries: Iterable[ManifestEntry]) -> Path:
        self.outdir.mkdir(parents=True, exist_ok=True)
        path = self.outdir / MANIFEST_FILE
        with open(path, "w") as f:
            f.write(",".join(MANIFEST_COLUMNS) + "\n")
            for entry in entries:
                f.write(entry.to_row() + "\n")
        logger.info("Wrote %s", path)
        return path
