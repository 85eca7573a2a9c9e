"""Gallery enrollment, 1:N identification, CMC curves and result files."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from fpfusion.descriptors import DescriptorSet
from fpfusion.embedding import EmbeddingConfig, build_synthetic_embeddings
from fpfusion.fusion import CHANNELS, FusionConfig, fuse_ranks, match_all_channels
from fpfusion.mcc import CylinderConfig, build_mcc_set
from fpfusion.templates import MinutiaeTemplate


@dataclass(frozen=True)
class GalleryEntry:
    template: MinutiaeTemplate
    mcc: DescriptorSet
    embedding: DescriptorSet


@dataclass(frozen=True)
class IdentificationResult:
    """Ranked candidate list for one query; ties break on gallery id."""

    query_id: str
    candidates: tuple  # ((gallery_id, score), ...) sorted by score desc
    rank_of_mate: int | None = None
    channel: str = ""


@dataclass(frozen=True)
class CmcCurve:
    """accuracies[k-1] = fraction of queries whose mate ranks <= k."""

    accuracies: tuple

    def __post_init__(self):
        object.__setattr__(self, "accuracies", tuple(self.accuracies))

    def __getitem__(self, k: int) -> float:
        """Accuracy at rank k (1-based)."""
        return self.accuracies[k - 1]

    def __len__(self) -> int:
        return len(self.accuracies)


class Gallery:
    """Enrolled templates with descriptors prebuilt once at enrollment."""

    def __init__(
        self,
        cylinder_cfg: CylinderConfig | None = None,
        embedding_cfg: EmbeddingConfig | None = None,
    ):
        self.cylinder_cfg = cylinder_cfg or CylinderConfig()
        self.embedding_cfg = embedding_cfg or EmbeddingConfig()
        self._entries: dict[str, GalleryEntry] = {}

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, template_id: str) -> bool:
        return template_id in self._entries

    def ids(self) -> list[str]:
        return list(self._entries)

    def entry(self, template_id: str) -> GalleryEntry:
        return self._entries[template_id]

    def entries(self):
        return self._entries.values()

    def enroll(self, t: MinutiaeTemplate, embeddings: DescriptorSet | None = None) -> None:
        """Add a template; embeddings default to the synthetic stand-in."""
        if t.id in self._entries:
            raise ValueError(f"template id {t.id!r} already enrolled")
        if embeddings is not None and len(embeddings) != len(t):
            raise ValueError(
                f"embedding count {len(embeddings)} != template size {len(t)}"
            )
        self._entries[t.id] = GalleryEntry(
            template=t,
            mcc=build_mcc_set(t, self.cylinder_cfg),
            embedding=embeddings
            if embeddings is not None
            else build_synthetic_embeddings(t, self.embedding_cfg),
        )

    def prepare_query(
        self, t: MinutiaeTemplate, embeddings: DescriptorSet | None = None
    ) -> GalleryEntry:
        """Build query-side descriptors with the gallery's configs."""
        return GalleryEntry(
            template=t,
            mcc=build_mcc_set(t, self.cylinder_cfg),
            embedding=embeddings
            if embeddings is not None
            else build_synthetic_embeddings(t, self.embedding_cfg),
        )


def _rank_candidates(scored: list, mate_id: str | None):
    scored.sort(key=lambda item: (-item[1], item[0]))
    rank = None
    if mate_id is not None:
        for pos, (gid, _) in enumerate(scored, start=1):
            if gid == mate_id:
                rank = pos
                break
    return tuple(scored), rank


def identify_all(
    gallery: Gallery,
    query: GalleryEntry,
    cfg: FusionConfig | None = None,
    mate_id: str | None = None,
) -> dict[str, IdentificationResult]:
    """Rank the whole gallery for every matcher in one sweep.

    Similarity matrices are shared across the four matchers per candidate,
    so this is the preferred entry point for benchmarks.
    """
    cfg = cfg or FusionConfig()
    if len(gallery) == 0:
        raise ValueError("cannot identify against an empty gallery")
    per_channel: dict[str, list] = {ch: [] for ch in CHANNELS}
    for entry in gallery.entries():
        results = match_all_channels(
            query.template,
            entry.template,
            query.mcc,
            entry.mcc,
            query.embedding,
            entry.embedding,
            cfg,
        )
        for ch in CHANNELS:
            per_channel[ch].append((entry.template.id, results[ch].score))
    out = {}
    for ch in CHANNELS:
        candidates, rank = _rank_candidates(per_channel[ch], mate_id)
        out[ch] = IdentificationResult(query.template.id, candidates, rank, ch)
    return out


def identify(
    gallery: Gallery,
    query: GalleryEntry,
    matcher: str,
    cfg: FusionConfig | None = None,
    mate_id: str | None = None,
) -> IdentificationResult:
    """Rank the gallery for one matcher ('mcc', 'emb', 'feature' or 'score')."""
    if matcher not in CHANNELS:
        raise ValueError(f"unknown matcher {matcher!r}; expected one of {CHANNELS}")
    return identify_all(gallery, query, cfg, mate_id)[matcher]


def cmc(results: list, k_max: int) -> CmcCurve:
    """Cumulative rank-k accuracy over identification results.

    A query whose mate was never found (rank_of_mate None) counts as a
    miss at every k.
    """
    if not results:
        raise ValueError("cannot build a CMC curve from zero results")
    accuracies = []
    for k in range(1, k_max + 1):
        hits = sum(1 for r in results if r.rank_of_mate is not None and r.rank_of_mate <= k)
        accuracies.append(hits / len(results))
    return CmcCurve(tuple(accuracies))


def rank_level_cmc(results_a: list, results_b: list, k_max: int) -> CmcCurve:
    """CMC of the per-query minimum rank across two matchers."""
    ranks_a = {r.query_id: r.rank_of_mate for r in results_a}
    ranks_b = {r.query_id: r.rank_of_mate for r in results_b}
    big = max(len(results_a), len(results_b)) + k_max + 1  # stands in for "missed"
    fused = fuse_ranks(
        {q: (v if v is not None else big) for q, v in ranks_a.items()},
        {q: (v if v is not None else big) for q, v in ranks_b.items()},
    )
    merged = [
        IdentificationResult(q, (), rank if rank < big else None)
        for q, rank in sorted(fused.items())
    ]
    return cmc(merged, k_max)


def fused_rank_results(results_a: list, results_b: list) -> list:
    """Per-query min-rank results, for CMC or summary tables."""
    ranks_a = {r.query_id: r.rank_of_mate for r in results_a}
    ranks_b = {r.query_id: r.rank_of_mate for r in results_b}
    if set(ranks_a) != set(ranks_b):
        raise ValueError("rank-level fusion needs identical query sets")
    out = []
    for q in sorted(ranks_a):
        va, vb = ranks_a[q], ranks_b[q]
        both = [v for v in (va, vb) if v is not None]
        out.append(IdentificationResult(q, (), min(both) if both else None))
    return out


def write_results(results: list, path) -> None:
    """Results CSV: query_id,rank,gallery_id,score,channel — byte-stable."""
    lines = ["query_id,rank,gallery_id,score,channel"]
    for r in results:
        for rank, (gid, score) in enumerate(r.candidates, start=1):
            lines.append(f"{r.query_id},{rank},{gid},{score:.6f},{r.channel}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_cmc(curve: CmcCurve, path) -> None:
    """CMC CSV: k,accuracy with 6-decimal floats."""
    lines = ["k,accuracy"]
    for k in range(1, len(curve) + 1):
        lines.append(f"{k},{curve[k]:.6f}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
