"""Paths and file names shared by the command-line tools."""
from pathlib import Path

BASE_DIR = Path(__file__).absolute().resolve().parents[1]
RUNS_DIR = BASE_DIR / 'runs'

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

MANIFEST_NAME = 'manifest.json'
CERTIFICATE_NAME = 'certificate.json'
REPORT_NAME = 'report.json'
SUMMARY_NAME = 'summary.json'
QMI_NAME = 'qmi.json'
DATASET_NAME = 'data.csv'
EXPERIMENT_NAME = 'experiment.json'
PROGRAM_NAME = 'program.dat-s'

VERIFY_SYSTEMS = 200
VERIFY_POINTS = 200
PORTRAIT_BOX = 4.0
