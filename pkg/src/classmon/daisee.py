"""DAiSEE-style dataset preparation.

Turns per-clip intensity annotations into a single primary label per clip,
balances classes by sampling clips, extracts a fixed number of frames per
clip, and emits a stratified train/test manifest. The pipeline consumes
per-clip directories of pre-extracted frame images; video decoding happens
outside this package.
"""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .classifier import preprocess_face
from .errors import AllZeroScores, EmptyClip, InsufficientClips, IOFailure
from .labels import EMOTION_LABELS, code_for_label

# Annotation columns in file order; ties in primary-label selection break
# in this order, which differs from the alphabetical code order.
ANNOTATION_COLUMNS = ("Boredom", "Engagement", "Confusion", "Frustration")
FRAMES_PER_CLIP = 10
TAKE_ALL = "all"

DEFAULT_TARGETS = {
    "boredom": 40,
    "confusion": 40,
    "engagement": 40,
    "frustration": TAKE_ALL,
}


@dataclass
class ClipAnnotation:
    clip_id: str
    scores: dict[str, int]

    def __post_init__(self):
        for column in ANNOTATION_COLUMNS:
            value = int(self.scores.get(column, -1))
            if not 0 <= value <= 3:
                raise ValueError(
                    f"clip {self.clip_id}: score {column}={value} outside 0..3"
                )
            self.scores[column] = value


@dataclass
class ManifestEntry:
    path: str
    code: int
    split: str


@dataclass
class PreparedManifest:
    entries: list[ManifestEntry]
    clip_counts: dict[str, int]
    seed: int

    def split_counts(self) -> dict[str, int]:
        out = {"train": 0, "test": 0}
        for e in self.entries:
            out[e.split] += 1
        return out


def read_annotations(path) -> list[ClipAnnotation]:
    """Parse a comma-separated annotation table with a ClipID header."""
    annotations = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            annotations.append(
                ClipAnnotation(
                    clip_id=row["ClipID"].strip(),
                    scores={c: int(row[c]) for c in ANNOTATION_COLUMNS},
                )
            )
    return annotations


def select_primary_emotion(annotation: ClipAnnotation) -> str:
    """Label of the highest intensity score; ties break by column order
    (Boredom, Engagement, Confusion, Frustration). All-zero clips are
    rejected."""
    best_column = max(
        ANNOTATION_COLUMNS,
        key=lambda c: (annotation.scores[c], -ANNOTATION_COLUMNS.index(c)),
    )
    if annotation.scores[best_column] == 0:
        raise AllZeroScores(f"clip {annotation.clip_id} has all-zero scores")
    return best_column.lower()


def balanced_sample(
    annotations: list[ClipAnnotation],
    targets: dict | None = None,
    seed: int = 0,
) -> list[tuple[ClipAnnotation, str]]:
    """Sample clips per class without replacement.

    A target of TAKE_ALL ("all") keeps every available clip of that class;
    numeric targets above availability raise InsufficientClips. Sampling is
    uniform and seeded; clip order in the result is sorted by clip id.
    """
    targets = dict(DEFAULT_TARGETS if targets is None else targets)
    by_label: dict[str, list[ClipAnnotation]] = {label: [] for label in EMOTION_LABELS}
    for ann in annotations:
        label = select_primary_emotion(ann)
        by_label[label].append(ann)
    rng = np.random.default_rng(seed)
    sampled: list[tuple[ClipAnnotation, str]] = []
    for label in EMOTION_LABELS:
        pool = sorted(by_label[label], key=lambda a: a.clip_id)
        target = targets.get(label, 0)
        if target == TAKE_ALL:
            chosen = pool
        else:
            target = int(target)
            if target > len(pool):
                raise InsufficientClips(
                    f"{label}: requested {target} clips, only {len(pool)} available"
                )
            idx = sorted(rng.choice(len(pool), size=target, replace=False))
            chosen = [pool[i] for i in idx]
        sampled.extend((ann, label) for ann in chosen)
    sampled.sort(key=lambda pair: pair[0].clip_id)
    return sampled


def select_frames(clip_dir, k: int = FRAMES_PER_CLIP) -> list[Path]:
    """Pick k frames uniformly across a clip's frame directory.

    Frames are the image files in the directory, sorted by name. Indices
    are floor(i * N / k); for short clips the deduplicated indices are
    padded by repeating the last frame until k paths are returned.
    """
    clip_dir = Path(clip_dir)
    try:
        frames = sorted(
            p for p in clip_dir.iterdir()
            if p.suffix.lower() in (".png", ".jpg", ".jpeg", ".bmp")
        )
    except OSError as exc:
        raise IOFailure(f"cannot list frames in {clip_dir}: {exc}") from None
    n = len(frames)
    if n == 0:
        raise EmptyClip(f"no frame images in {clip_dir}")
    indices = [min(i * n // k, n - 1) for i in range(k)]
    deduped = sorted(set(indices))
    while len(deduped) < k:
        deduped.append(deduped[-1])
    return [frames[i] for i in deduped]


def load_frame(path) -> np.ndarray:
    """Read one frame as a grayscale [0, 1] 64x64 image tensor."""
    try:
        with Image.open(path) as img:
            arr = np.asarray(img.convert("L"), dtype=np.float64)
    except OSError as exc:
        raise IOFailure(f"cannot read frame {path}: {exc}") from None
    return preprocess_face(arr)


def build_manifest(
    sampled: list[tuple[ClipAnnotation, str]],
    frames_root,
    seed: int = 0,
    test_fraction: float = 0.2,
    clip_level: bool = False,
    frames_per_clip: int = FRAMES_PER_CLIP,
) -> PreparedManifest:
    """Assemble the stratified train/test manifest from sampled clips.

    Frame paths are gathered per clip, labels are integer-encoded, and the
    split is stratified per class at frame level (default) or clip level.
    Re-running with identical inputs and seed yields an identical manifest.
    """
    frames_root = Path(frames_root)
    per_class_frames: dict[str, list[tuple[str, str]]] = {label: [] for label in EMOTION_LABELS}
    clip_counts = {label: 0 for label in EMOTION_LABELS}
    for ann, label in sampled:
        clip_counts[label] += 1
        clip_dir = frames_root / Path(ann.clip_id).stem
        for frame in select_frames(clip_dir, k=frames_per_clip):
            per_class_frames[label].append((str(frame), ann.clip_id))

    rng = np.random.default_rng(seed)
    entries: list[ManifestEntry] = []
    for label in EMOTION_LABELS:
        code = code_for_label(label)
        frames = per_class_frames[label]
        if not frames:
            continue
        if clip_level:
            clips = sorted(set(clip_id for _, clip_id in frames))
            n_test = int(round(test_fraction * len(clips)))
            shuffled = list(rng.permutation(len(clips)))
            test_clips = set(clips[i] for i in shuffled[:n_test])
            for path, clip_id in frames:
                split = "test" if clip_id in test_clips else "train"
                entries.append(ManifestEntry(path=path, code=code, split=split))
        else:
            n_test = int(round(test_fraction * len(frames)))
            shuffled = list(rng.permutation(len(frames)))
            test_idx = set(shuffled[:n_test])
            for i, (path, _) in enumerate(frames):
                split = "test" if i in test_idx else "train"
                entries.append(ManifestEntry(path=path, code=code, split=split))
    entries.sort(key=lambda e: (e.split, e.code, e.path))
    return PreparedManifest(entries=entries, clip_counts=clip_counts, seed=seed)


def write_manifest(manifest: PreparedManifest, path) -> None:
    """Comma-separated manifest: path, class code, split tag."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["path", "code", "split"])
        for entry in manifest.entries:
            writer.writerow([entry.path, entry.code, entry.split])


def read_manifest(path) -> list[ManifestEntry]:
    entries = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            entries.append(
                ManifestEntry(path=row["path"], code=int(row["code"]), split=row["split"])
            )
    return entries


def load_split(entries: list[ManifestEntry], split: str):
    """Materialize one split as (X, y) arrays of preprocessed images."""
    chosen = [e for e in entries if e.split == split]
    X = np.stack([load_frame(e.path) for e in chosen]) if chosen else np.empty((0, 64, 64, 1))
    y = np.array([e.code for e in chosen], dtype=np.int64)
    return X, y


def prepare(
    annotations_path,
    frames_root,
    seed: int = 0,
    targets: dict | None = None,
    clip_level: bool = False,
    frames_per_clip: int = FRAMES_PER_CLIP,
) -> PreparedManifest:
    """Full pipeline: annotations -> labels -> balanced sample -> manifest."""
    annotations = read_annotations(annotations_path)
    sampled = balanced_sample(annotations, targets=targets, seed=seed)
    return build_manifest(
        sampled,
        frames_root,
        seed=seed,
        clip_level=clip_level,
        frames_per_clip=frames_per_clip,
    )
