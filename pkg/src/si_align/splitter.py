"""Train/dev/test partitioning with contamination guards, plus corpus stats.

Dev and test talks are hand-picked inputs, never sampled. The allowlist is
the set of talk ids known to be safe for training (talks present in the
external corpus's own training split); evaluation talks must stay out of it.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path

from .corpus import Rank, ValidationError

log = logging.getLogger(__name__)

VARIANTS = ("coarse", "intra", "inter")
SUBSETS = ("all", "S-rank")


class ContaminationError(ValidationError):
    pass


@dataclass(frozen=True)
class SplitManifest:
    train_ids: frozenset[str]
    dev_ids: frozenset[str]
    test_ids: frozenset[str]
    allowlist_id_source: str


def make_split(talks, allowlist, dev_ids, test_ids,
               allowlist_source: str = "") -> SplitManifest:
    """Partition talks into train/dev/test.

    Train is every talk not in dev/test, restricted to the allowlist. A dev
    or test talk found in the allowlist is a hard contamination error: it
    would overlap the external training data the allowlist represents.
    """
    talks = set(talks)
    allowlist = set(allowlist)
    dev_ids = set(dev_ids)
    test_ids = set(test_ids)
    overlap = dev_ids & test_ids
    if overlap:
        raise ValidationError(f"dev and test overlap: {sorted(overlap)}")
    unknown = (dev_ids | test_ids) - talks
    if unknown:
        raise ValidationError(f"unknown talk ids: {sorted(unknown)}")
    contaminated = (dev_ids | test_ids) & allowlist
    if contaminated:
        raise ContaminationError(
            f"dev/test talks present in the training allowlist: {sorted(contaminated)}"
        )
    train = (talks - dev_ids - test_ids) & allowlist
    excluded = talks - train - dev_ids - test_ids
    if excluded:
        log.info("%d talks outside the allowlist excluded from train: %s",
                 len(excluded), sorted(excluded)[:10])
    return SplitManifest(
        train_ids=frozenset(train),
        dev_ids=frozenset(dev_ids),
        test_ids=frozenset(test_ids),
        allowlist_id_source=allowlist_source,
    )


def sample_eval_ids(talks, n_dev: int, n_test: int, seed: int) -> tuple[list[str], list[str]]:
    """Convenience seeded selector for dev/test ids; never the default path."""
    pool = sorted(talks)
    if n_dev + n_test > len(pool):
        raise ValidationError(f"cannot draw {n_dev}+{n_test} talks from {len(pool)}")
    rng = random.Random(seed)
    picked = rng.sample(pool, n_dev + n_test)
    return picked[:n_dev], picked[n_dev:]


def write_split_manifest(split: SplitManifest, path) -> None:
    obj = {
        "train_ids": sorted(split.train_ids),
        "dev_ids": sorted(split.dev_ids),
        "test_ids": sorted(split.test_ids),
        "allowlist_id_source": split.allowlist_id_source,
    }
    Path(path).write_text(
        json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def read_split_manifest(path) -> SplitManifest:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    return SplitManifest(
        train_ids=frozenset(obj["train_ids"]),
        dev_ids=frozenset(obj["dev_ids"]),
        test_ids=frozenset(obj["test_ids"]),
        allowlist_id_source=obj.get("allowlist_id_source", ""),
    )


def read_allowlist(path) -> set[str]:
    """Plain text, one talk id per line; blank lines ignored."""
    ids = set()
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            talk_id = line.strip()
            if talk_id:
                ids.add(talk_id)
    return ids


@dataclass(frozen=True)
class StatsTable:
    """Rows of (variant, subset, talk count, pair count)."""

    rows: tuple[tuple[str, str, int, int], ...]

    def as_tsv(self) -> str:
        lines = ["variant\tsubset\ttalks\tpairs"]
        lines += [f"{v}\t{s}\t{t}\t{p}" for v, s, t, p in self.rows]
        return "\n".join(lines) + "\n"

    def as_text(self) -> str:
        header = ("variant", "subset", "talks", "pairs")
        table = [header] + [(v, s, str(t), str(p)) for v, s, t, p in self.rows]
        widths = [max(len(row[c]) for row in table) for c in range(4)]
        return "\n".join(
            "  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)) for row in table
        ) + "\n"


def corpus_stats(pair_counts: dict[str, dict[str, int]],
                 ranks: dict[str, Rank]) -> StatsTable:
    """Talk and pair counts per pipeline variant, for all talks and the
    S-rank subset. pair_counts maps variant -> talk_id -> surviving pairs."""
    rows = []
    for variant in VARIANTS:
        counts = pair_counts.get(variant, {})
        for subset in SUBSETS:
            if subset == "S-rank":
                talk_ids = [t for t in counts if ranks.get(t) == Rank.S]
            else:
                talk_ids = list(counts)
            n_talks = sum(1 for t in talk_ids if counts[t] > 0)
            n_pairs = sum(counts[t] for t in talk_ids)
            rows.append((variant, subset, n_talks, n_pairs))
    return StatsTable(rows=tuple(rows))
