"""On-disk project persistence: structured-text documents, written atomically.

A project is a directory of JSON documents, one per artifact, so projects
are portable archives. Every write goes to a temp file in the same
directory followed by os.replace, which means readers observe either the
old or the new document and never a torn one. Mutations are serialized per
project by an in-process lock; background jobs publish results only
through these atomic writes.

Layout under the data directory:

    projects/{pid}/project.json             manifest with SourceMeta
    projects/{pid}/jobs.json                job records
    projects/{pid}/requests.json            idempotency log
    projects/{pid}/parts/{part}/archive.bin uploaded pose archive
    projects/{pid}/parts/{part}/poses/      extracted keypoint documents
    projects/{pid}/parts/{part}/tracks.json
    projects/{pid}/parts/{part}/rushes/{rid}.json
    projects/{pid}/parts/{part}/desired/{rid}.json
    projects/{pid}/parts/{part}/timeline.json
    projects/{pid}/parts/{part}/annotations.json
    requests.json                           global idempotency log
"""

from __future__ import annotations

import io
import json
import os
import tarfile
import threading
import uuid
import zipfile
from pathlib import Path

from ..export import Annotation, EditTimeline, Rush
from ..framing import DesiredSeries
from ..pose import _KEYPOINT_FILE_RE, SourceMeta, load_pose_sequence
from ..tracking import TrackStore

PROJECT_SCHEMA = "stagecam/project/1"


class StoreError(RuntimeError):
    pass


def atomic_write_bytes(path: Path, data: bytes) -> None:
    """Temp file in the same directory, fsync, then atomic rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.parent / f".{path.name}.{uuid.uuid4().hex}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def atomic_write_json(path: Path, doc: dict | list) -> None:
    atomic_write_bytes(path, json.dumps(doc, indent=1).encode("utf-8"))


def read_json(path: Path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


class ProjectStore:
    """All document I/O for one data directory."""

    def __init__(self, data_dir: str | Path):
        self.root = Path(data_dir)
        (self.root / "projects").mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    # ---- locking ----

    def lock(self, project_id: str) -> threading.Lock:
        """Per-project mutation lock; hold only while applying + persisting."""
        with self._locks_guard:
            return self._locks.setdefault(project_id, threading.Lock())

    # ---- projects ----

    def project_dir(self, project_id: str) -> Path:
        return self.root / "projects" / project_id

    def create_project(self, meta: SourceMeta) -> str:
        project_id = uuid.uuid4().hex[:12]
        pdir = self.project_dir(project_id)
        pdir.mkdir(parents=True)
        atomic_write_json(pdir / "project.json", {
            "schema": PROJECT_SCHEMA,
            "id": project_id,
            "meta": meta.to_doc(),
        })
        return project_id

    def list_projects(self) -> list[str]:
        return sorted(
            p.name for p in (self.root / "projects").iterdir()
            if (p / "project.json").exists())

    def load_manifest(self, project_id: str) -> dict:
        path = self.project_dir(project_id) / "project.json"
        if not path.exists():
            raise KeyError(f"unknown project: {project_id}")
        doc = read_json(path)
        if doc.get("schema") != PROJECT_SCHEMA:
            raise StoreError(f"unsupported project schema: {doc.get('schema')!r}")
        return doc

    def load_meta(self, project_id: str) -> SourceMeta:
        return SourceMeta.from_doc(self.load_manifest(project_id)["meta"])

    # ---- parts ----

    def part_dir(self, project_id: str, part: int) -> Path:
        if part < 0:
            raise KeyError(f"invalid part: {part}")
        return self.project_dir(project_id) / "parts" / str(part)

    def list_parts(self, project_id: str) -> list[int]:
        base = self.project_dir(project_id) / "parts"
        if not base.is_dir():
            return []
        return sorted(int(p.name) for p in base.iterdir() if p.name.isdigit())

    def part_meta(self, project_id: str, part: int) -> SourceMeta:
        """Project meta narrowed to one ten-minute part's frame range."""
        meta = self.load_meta(project_id)
        offset = part * meta.part_length_frames
        count = min(meta.part_length_frames, meta.frame_count - offset)
        if count <= 0:
            raise KeyError(f"part {part} is beyond the recording")
        return SourceMeta(width=meta.width, height=meta.height, fps=meta.fps,
                          frame_count=count,
                          part_length_frames=meta.part_length_frames)

    def part_offset(self, project_id: str, part: int) -> int:
        return part * self.load_meta(project_id).part_length_frames

    # ---- pose archives ----

    def save_archive(self, project_id: str, part: int, data: bytes) -> None:
        atomic_write_bytes(self.part_dir(project_id, part) / "archive.bin", data)

    def extract_archive(self, project_id: str, part: int) -> int:
        """Unpack the uploaded archive into the part's poses directory.

        Entries are flattened to their basename and only keypoint documents
        are kept, so hostile archive paths cannot escape the store.
        """
        src = self.part_dir(project_id, part) / "archive.bin"
        if not src.exists():
            raise StoreError("no pose archive uploaded")
        poses = self.part_dir(project_id, part) / "poses"
        poses.mkdir(parents=True, exist_ok=True)
        data = src.read_bytes()
        count = 0
        if data[:2] == b"PK":
            with zipfile.ZipFile(io.BytesIO(data)) as zf:
                for info in zf.infolist():
                    name = os.path.basename(info.filename)
                    if not _KEYPOINT_FILE_RE.search(name):
                        continue
                    atomic_write_bytes(poses / name, zf.read(info))
                    count += 1
        else:
            try:
                tf = tarfile.open(fileobj=io.BytesIO(data), mode="r:*")
            except tarfile.TarError as exc:
                raise StoreError(f"archive is neither zip nor tar: {exc}") from exc
            with tf:
                for member in tf.getmembers():
                    if not member.isfile():
                        continue
                    name = os.path.basename(member.name)
                    if not _KEYPOINT_FILE_RE.search(name):
                        continue
                    fh = tf.extractfile(member)
                    if fh is None:
                        continue
                    atomic_write_bytes(poses / name, fh.read())
                    count += 1
        if count == 0:
            raise StoreError("archive contains no keypoint documents")
        return count

    def poses_ready(self, project_id: str, part: int) -> bool:
        poses = self.part_dir(project_id, part) / "poses"
        return poses.is_dir() and any(
            _KEYPOINT_FILE_RE.search(p.name) for p in poses.iterdir())

    def load_seq(self, project_id: str, part: int):
        meta = self.part_meta(project_id, part)
        poses = self.part_dir(project_id, part) / "poses"
        if not poses.is_dir():
            raise StoreError(f"part {part} has no ingested poses")
        return load_pose_sequence(
            poses, meta, frame_offset=self.part_offset(project_id, part))

    # ---- tracks ----

    def save_tracks(self, project_id: str, part: int, tracks: TrackStore) -> None:
        atomic_write_json(self.part_dir(project_id, part) / "tracks.json",
                          tracks.to_doc())

    def load_tracks(self, project_id: str, part: int,
                    with_seq: bool = False) -> TrackStore:
        path = self.part_dir(project_id, part) / "tracks.json"
        if not path.exists():
            raise KeyError(f"part {part} has no tracks yet")
        seq = self.load_seq(project_id, part) if with_seq else None
        return TrackStore.from_doc(read_json(path), seq=seq)

    def has_tracks(self, project_id: str, part: int) -> bool:
        return (self.part_dir(project_id, part) / "tracks.json").exists()

    # ---- rushes and desired series ----

    def new_rush_id(self, project_id: str, part: int) -> str:
        """Globally resolvable id: project, part and a fresh sequence number."""
        existing = self.list_rushes(project_id, part)
        n = 0
        while f"{project_id}.{part}.r{n}" in existing:
            n += 1
        return f"{project_id}.{part}.r{n}"

    @staticmethod
    def split_rush_id(rush_id: str) -> tuple[str, int, str]:
        try:
            project_id, part, tail = rush_id.split(".")
            return project_id, int(part), tail
        except ValueError as exc:
            raise KeyError(f"malformed rush id: {rush_id}") from exc

    def save_rush(self, project_id: str, part: int, rush: Rush) -> None:
        atomic_write_json(
            self.part_dir(project_id, part) / "rushes" / f"{rush.id}.json",
            rush.to_doc())

    def load_rush(self, project_id: str, part: int, rush_id: str) -> Rush:
        path = self.part_dir(project_id, part) / "rushes" / f"{rush_id}.json"
        if not path.exists():
            raise KeyError(f"unknown rush: {rush_id}")
        return Rush.from_doc(read_json(path))

    def list_rushes(self, project_id: str, part: int) -> list[str]:
        base = self.part_dir(project_id, part) / "rushes"
        if not base.is_dir():
            return []
        return sorted(p.stem for p in base.glob("*.json"))

    def save_desired(self, project_id: str, part: int, rush_id: str,
                     series: DesiredSeries) -> None:
        atomic_write_json(
            self.part_dir(project_id, part) / "desired" / f"{rush_id}.json",
            series.to_doc())

    def load_desired(self, project_id: str, part: int,
                     rush_id: str) -> DesiredSeries:
        path = self.part_dir(project_id, part) / "desired" / f"{rush_id}.json"
        if not path.exists():
            raise KeyError(f"rush {rush_id} has no desired series")
        return DesiredSeries.from_doc(read_json(path))

    # ---- timeline and annotations ----

    def save_timeline(self, project_id: str, part: int, tl: EditTimeline) -> None:
        atomic_write_json(self.part_dir(project_id, part) / "timeline.json",
                          tl.to_doc())

    def load_timeline(self, project_id: str, part: int) -> EditTimeline:
        path = self.part_dir(project_id, part) / "timeline.json"
        if not path.exists():
            raise KeyError(f"part {part} has no timeline yet")
        return EditTimeline.from_doc(read_json(path))

    def save_annotations(self, project_id: str, part: int,
                         annotations: list[Annotation]) -> None:
        atomic_write_json(
            self.part_dir(project_id, part) / "annotations.json",
            {"schema": "stagecam/annotations/1",
             "annotations": [a.to_doc() for a in annotations]})

    def load_annotations(self, project_id: str, part: int) -> list[Annotation]:
        path = self.part_dir(project_id, part) / "annotations.json"
        if not path.exists():
            return []
        doc = read_json(path)
        return [Annotation.from_doc(d) for d in doc.get("annotations", [])]

    # ---- jobs ----

    def load_jobs(self, project_id: str) -> list[dict]:
        path = self.project_dir(project_id) / "jobs.json"
        return read_json(path) if path.exists() else []

    def save_jobs(self, project_id: str, jobs: list[dict]) -> None:
        atomic_write_json(self.project_dir(project_id) / "jobs.json", jobs)

    # ---- idempotency log ----

    def _request_log_path(self, project_id: str | None) -> Path:
        if project_id is None:
            return self.root / "requests.json"
        return self.project_dir(project_id) / "requests.json"

    def recall_request(self, project_id: str | None, request_id: str):
        path = self._request_log_path(project_id)
        if not path.exists():
            return None
        return read_json(path).get(request_id)

    def log_request(self, project_id: str | None, request_id: str,
                    status: int, body) -> None:
        path = self._request_log_path(project_id)
        log = read_json(path) if path.exists() else {}
        log[request_id] = {"status": status, "body": body}
        atomic_write_json(path, log)
