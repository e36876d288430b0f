"""Serialization of tensors, binary masks, and sample manifests.

Tensor files use a minimal binary container ("ATSB"):

    magic      4 bytes, ASCII "ATSB"
    version    uint16, little-endian (currently 1)
    header_len uint32, little-endian
    header     UTF-8 JSON: {"dtype": "f32", "shape": [...], "layout": "row-major"}
    payload    raw little-endian IEEE-754 float32, row-major

Binary masks are stored as 8-bit grayscale PNG with values {0, 255} and
decoded to boolean arrays.  Manifests are JSON with relative paths resolved
against the manifest's directory.
"""

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

MAGIC = b"ATSB"
VERSION = 1


class TensorFormatError(ValueError):
    """Raised when a tensor file violates the ATSB container contract."""


class ManifestError(ValueError):
    """Raised when a sample manifest fails validation."""


def write_tensor(path, values) -> None:
    """Write a float array to `path` in the ATSB container format.

    Rejects non-finite values, reporting the flat (row-major) index of the
    first offender.
    """
    arr = np.asarray(values, dtype=np.float32)
    if arr.ndim == 0:
        raise TensorFormatError("scalar tensors are not supported")
    if any(s <= 0 for s in arr.shape):
        raise TensorFormatError(f"shape entries must be strictly positive, got {arr.shape}")
    finite = np.isfinite(arr.ravel())
    if not finite.all():
        idx = int(np.argmin(finite))
        raise TensorFormatError(f"non-finite value at flat index {idx}")
    header = json.dumps(
        {"dtype": "f32", "shape": list(arr.shape), "layout": "row-major"}
    ).encode("utf-8")
    path = Path(path)
    try:
        with open(path, "wb") as f:
            f.write(MAGIC)
            f.write(struct.pack("<HI", VERSION, len(header)))
            f.write(header)
            f.write(arr.astype("<f4", copy=False).tobytes(order="C"))
    except OSError as e:
        raise OSError(f"failed writing tensor to {path}: {e}") from e


def read_tensor(path) -> np.ndarray:
    """Read an ATSB tensor file back into a float32 array (bit-exact)."""
    path = Path(path)
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < 10:
        raise TensorFormatError(f"{path}: truncated file ({len(data)} bytes)")
    if data[:4] != MAGIC:
        raise TensorFormatError(f"{path}: bad magic {data[:4]!r}")
    version, header_len = struct.unpack("<HI", data[4:10])
    if version != VERSION:
        raise TensorFormatError(f"{path}: unsupported version {version}")
    if len(data) < 10 + header_len:
        raise TensorFormatError(f"{path}: header truncated")
    try:
        header = json.loads(data[10 : 10 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise TensorFormatError(f"{path}: malformed header: {e}") from e
    if header.get("dtype") != "f32":
        raise TensorFormatError(f"{path}: unsupported dtype {header.get('dtype')!r}")
    if header.get("layout") != "row-major":
        raise TensorFormatError(f"{path}: unsupported layout {header.get('layout')!r}")
    shape = header.get("shape")
    if not isinstance(shape, list) or not shape or any(
        not isinstance(s, int) or s <= 0 for s in shape
    ):
        raise TensorFormatError(f"{path}: invalid shape {shape!r}")
    payload = data[10 + header_len :]
    expected = 4 * int(np.prod(shape))
    if len(payload) != expected:
        raise TensorFormatError(
            f"{path}: payload length {len(payload)} != expected {expected} for shape {shape}"
        )
    return np.frombuffer(payload, dtype="<f4").reshape(shape).copy()


def write_mask(path, mask) -> None:
    """Write a boolean mask as an 8-bit grayscale PNG with values {0, 255}."""
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {mask.shape}")
    img = Image.fromarray(np.where(mask.astype(bool), 255, 0).astype(np.uint8), mode="L")
    img.save(Path(path), format="PNG")


def read_mask(path) -> np.ndarray:
    """Read a {0, 255} grayscale PNG back into a boolean mask."""
    with Image.open(Path(path)) as img:
        arr = np.asarray(img.convert("L"))
    bad = ~np.isin(arr, (0, 255))
    if bad.any():
        raise ValueError(f"{path}: mask contains values outside {{0, 255}}")
    return arr == 255


@dataclass(frozen=True)
class PhraseSpec:
    """A noun phrase: its token map indices, head word, and category flags."""

    phrase_id: str
    word_token_ids: tuple
    head_index: int
    word_embeddings: np.ndarray  # (n_words, dim)
    is_plural: bool
    is_thing: bool


@dataclass(frozen=True)
class CandidateMaskPool:
    """Class-agnostic candidate masks at image resolution (may be empty)."""

    masks: tuple  # of boolean arrays, all the same shape

    @property
    def count(self):
        return len(self.masks)


@dataclass(frozen=True)
class SampleManifest:
    """One evaluation sample: image, phrases, attention tensors, GT masks.

    All paths are absolute after loading.
    """

    sample_id: str
    image_path: Path
    image_size: tuple  # (H, W)
    phrases: tuple  # of PhraseSpec
    cross_attention_paths: dict  # token id -> Path to a score-map tensor
    self_attention_path: Path
    candidate_pool_path: Path
    gt_mask_paths: dict  # phrase_id -> Path
    base_dir: Path = field(repr=False, default=None)


def _require(data, key, path):
    if key not in data:
        raise ManifestError(f"{path}: missing field '{key}'")
    return data[key]


def _resolve(base: Path, rel, field_name, path) -> Path:
    p = (base / rel).resolve()
    if not p.exists():
        raise ManifestError(f"{path}: {field_name} points to missing file {p}")
    return p


def load_manifest(path) -> SampleManifest:
    """Load and eagerly validate a sample manifest JSON file."""
    path = Path(path)
    base = path.parent
    with open(path) as f:
        data = json.load(f)

    sample_id = _require(data, "sample_id", path)
    image_size = tuple(_require(data, "image_size", path))
    if len(image_size) != 2 or any(not isinstance(s, int) or s <= 0 for s in image_size):
        raise ManifestError(f"{path}: image_size must be two positive ints, got {image_size}")
    image_path = _resolve(base, _require(data, "image_path", path), "image_path", path)

    cross_paths = {
        int(k): _resolve(base, v, f"cross_attention_paths[{k}]", path)
        for k, v in _require(data, "cross_attention_paths", path).items()
    }
    self_path = _resolve(
        base, _require(data, "self_attention_path", path), "self_attention_path", path
    )
    pool_path = _resolve(
        base, _require(data, "candidate_pool_path", path), "candidate_pool_path", path
    )
    # Eagerly check the pool index so a dangling mask path fails at load time.
    _pool_mask_paths(pool_path)

    phrases = []
    for i, p in enumerate(_require(data, "phrases", path)):
        pid = _require(p, "phrase_id", path)
        token_ids = tuple(_require(p, "word_token_ids", path))
        if not token_ids:
            raise ManifestError(f"{path}: phrase '{pid}' has empty word_token_ids")
        missing = [t for t in token_ids if t not in cross_paths]
        if missing:
            raise ManifestError(
                f"{path}: phrase '{pid}' references absent cross-attention tokens {missing}"
            )
        head = _require(p, "head_index", path)
        if head != len(token_ids) - 1:
            raise ManifestError(
                f"{path}: phrase '{pid}' head_index {head} is not the last position"
            )
        emb = np.asarray(_require(p, "word_embeddings", path), dtype=np.float64)
        if emb.ndim != 2 or emb.shape[0] != len(token_ids):
            raise ManifestError(
                f"{path}: phrase '{pid}' needs one equal-length embedding per word"
            )
        phrases.append(
            PhraseSpec(
                phrase_id=pid,
                word_token_ids=token_ids,
                head_index=head,
                word_embeddings=emb,
                is_plural=bool(_require(p, "is_plural", path)),
                is_thing=bool(_require(p, "is_thing", path)),
            )
        )
    if not phrases:
        raise ManifestError(f"{path}: manifest has no phrases")

    gt = _require(data, "gt_mask_paths", path)
    if len(gt) != len(phrases):
        raise ManifestError(
            f"{path}: gt_mask_paths has {len(gt)} entries for {len(phrases)} phrases"
        )
    gt_paths = {}
    for ph in phrases:
        if ph.phrase_id not in gt:
            raise ManifestError(f"{path}: gt_mask_paths missing phrase '{ph.phrase_id}'")
        gt_paths[ph.phrase_id] = _resolve(
            base, gt[ph.phrase_id], f"gt_mask_paths[{ph.phrase_id}]", path
        )

    return SampleManifest(
        sample_id=sample_id,
        image_path=image_path,
        image_size=image_size,
        phrases=tuple(phrases),
        cross_attention_paths=cross_paths,
        self_attention_path=self_path,
        candidate_pool_path=pool_path,
        gt_mask_paths=gt_paths,
        base_dir=base,
    )


def _pool_mask_paths(pool_path: Path):
    with open(pool_path) as f:
        index = json.load(f)
    if "masks" not in index or not isinstance(index["masks"], list):
        raise ManifestError(f"{pool_path}: pool index must contain a 'masks' list")
    base = pool_path.parent
    paths = []
    for rel in index["masks"]:
        p = (base / rel).resolve()
        if not p.exists():
            raise ManifestError(f"{pool_path}: pool mask missing: {p}")
        paths.append(p)
    return paths


def load_candidate_pool(pool_path) -> CandidateMaskPool:
    """Load all candidate masks listed in a pool index JSON."""
    paths = _pool_mask_paths(Path(pool_path))
    masks = tuple(read_mask(p) for p in paths)
    shapes = {m.shape for m in masks}
    if len(shapes) > 1:
        raise ManifestError(f"{pool_path}: candidate masks have mixed resolutions {shapes}")
    return CandidateMaskPool(masks=masks)
