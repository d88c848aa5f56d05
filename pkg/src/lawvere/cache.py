"""On-disk cache of enumerated models.

Layout: ``<cache_dir>/<theory_hash>/models-k<K>[-iso].json``. Each file holds
every model of size ``1..K``; exact-size requests filter it.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
from collections import Counter
from pathlib import Path

from .algebra import DEFAULT_MAX_NODES, FiniteAlgebra, enumerate_models, theory_hash
from .terms import Theory

FORMAT_VERSION = 1
CACHE_ENV = "LAWVERE_CACHE_DIR"

log = logging.getLogger(__name__)


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "lawvere"


class ModelCache:
    """``stats`` counts hits, misses, computations and writes."""

    def __init__(self, cache_dir=None, enabled: bool = True):
        self.cache_dir = Path(cache_dir) if cache_dir is not None else default_cache_dir()
        self.enabled = enabled
        self.stats: Counter = Counter()

    def path(self, theory: Theory, k: int, up_to_iso: bool) -> Path:
        suffix = "-iso" if up_to_iso else ""
        return self.cache_dir / theory_hash(theory) / f"models-k{k}{suffix}.json"

    def _read(self, path: Path, theory: Theory, k: int, up_to_iso: bool):
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            return None
        except (OSError, ValueError) as exc:
            log.warning("ignoring unreadable cache entry %s: %s", path, exc)
            return None
        if not isinstance(payload, dict) or payload.get("format_version") != FORMAT_VERSION:
            return None
        try:
            if (payload["theory_hash"] != theory_hash(theory) or payload["k"] != k
                    or payload["up_to_iso"] != up_to_iso):
                return None
            return [FiniteAlgebra.from_record(r, theory) for r in payload["models"]]
        except Exception as exc:  # any malformed payload is recomputed
            log.warning("ignoring corrupt cache entry %s: %s", path, exc)
            return None

    def _write(self, path: Path, theory: Theory, k: int, up_to_iso: bool, models):
        payload = {
            "format_version": FORMAT_VERSION,
            "theory": theory.name,
            "theory_hash": theory_hash(theory),
            "k": k,
            "up_to_iso": up_to_iso,
            "models": [A.to_record() for A in models],
        }
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(payload, fh, separators=(",", ":"))
            os.replace(tmp, path)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
        self.stats["writes"] += 1

    def get_or_compute(self, theory: Theory, k: int, up_to_iso: bool = True, jobs: int = 1,
                       max_nodes: int = DEFAULT_MAX_NODES) -> list[FiniteAlgebra]:
        path = self.path(theory, k, up_to_iso)
        if self.enabled:
            cached = self._read(path, theory, k, up_to_iso)
            if cached is not None:
                self.stats["hits"] += 1
                return cached
            self.stats["misses"] += 1
        models = list(enumerate_models(theory, k, up_to_iso=up_to_iso, jobs=jobs,
                                       max_nodes=max_nodes))
        self.stats["computations"] += 1
        if self.enabled:
            self._write(path, theory, k, up_to_iso, models)
        return models


def cache_get_or_compute(theory: Theory, k: int, cache: ModelCache | None = None,
                         **kwargs) -> list[FiniteAlgebra]:
    return (cache or ModelCache()).get_or_compute(theory, k, **kwargs)
