"""Pydantic models for run manifests.

Every command that writes files also writes a manifest listing its inputs
and artifacts with their SHA-256 digests.
"""
from typing import List, Optional

from pydantic import BaseModel


class ArtifactRecord(BaseModel):
    path: str
    sha256: str
    size: int


class RunManifest(BaseModel):
    command: str
    arguments: dict = {}
    inputs: List[ArtifactRecord] = []
    artifacts: List[ArtifactRecord] = []
    seed: Optional[int] = None
    version: str
    wall_time: float
    status: str
    exit_code: int
