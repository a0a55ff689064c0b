"""Answer-verifiability and complexity metrics over expert annotation files.

An annotation file is a JSON array of answers, each holding claims, each
claim holding citations with a manually-checked validity flag.  Validity is
an input: this tool never decides whether a source is real.  The per-claim
rates get progressively stricter (cited >= justified >= relevant), and the
loader enforces that ordering on every claim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .model import Issue


class AnnotationError(Exception):
    """Annotations failed structural validation; carries the issues."""

    def __init__(self, issues: list[Issue]):
        self.issues = issues
        super().__init__("; ".join(str(i) for i in issues[:5]))


@dataclass(frozen=True)
class Citation:
    citation_id: str
    valid: bool


@dataclass(frozen=True)
class Claim:
    claim_id: str
    citations: tuple[Citation, ...] = ()
    justified: bool = False
    relevant: bool = False

    @property
    def valid_citations(self) -> int:
        return sum(1 for c in self.citations if c.valid)


@dataclass(frozen=True)
class AnswerAnnotation:
    answer_id: str
    claims: tuple[Claim, ...] = ()


@dataclass(frozen=True)
class ComplexityAnnotation:
    answer_id: str
    max_hops: int
    num_concepts: int


@dataclass(frozen=True)
class MetricsReport:
    answers: int
    claims: int
    citations: int
    claim_density: float
    citation_density: float | None
    hallucination_rate: float | None  # percent
    citation_rate: float | None       # percent
    justification_rate: float | None  # percent
    relevance_rate: float | None      # percent
    complexity: dict | None = field(default=None)

    def to_dict(self) -> dict:
        def pct(value: float | None) -> float | None:
            return None if value is None else round(value, 2)

        out = {
            "answers": self.answers,
            "claims": self.claims,
            "citations": self.citations,
            "claim_density": round(self.claim_density, 2),
            "citation_density": pct(self.citation_density),
            "source_hallucination_rate": pct(self.hallucination_rate),
            "citation_rate": pct(self.citation_rate),
            "justification_rate": pct(self.justification_rate),
            "relevance_rate": pct(self.relevance_rate),
        }
        out["complexity"] = self.complexity
        return out

    def to_text(self) -> str:
        def pct(value: float | None) -> str:
            return "n/a" if value is None else f"{value:.2f}%"

        def num(value: float | None) -> str:
            return "n/a" if value is None else f"{value:.2f}"

        lines = [
            f"Answers: {self.answers}   Claims: {self.claims}   Citations: {self.citations}",
            f"Claim Density:             {self.claim_density:.2f}",
            f"Citation Density:          {num(self.citation_density)}",
            f"Source Hallucination Rate: {pct(self.hallucination_rate)}",
            f"Citation Rate:             {pct(self.citation_rate)}",
            f"Justification Rate:        {pct(self.justification_rate)}",
            f"Relevance Rate:            {pct(self.relevance_rate)}",
        ]
        if self.complexity is not None:
            hops = self.complexity["max_hops"]
            concepts = self.complexity["num_concepts"]
            lines.append(
                f"Maximum Number of Hops:    {hops['mean']:.1f} ±{hops['stdev']:.1f}"
            )
            lines.append(
                f"Number of Concepts:        {concepts['mean']:.1f} ±{concepts['stdev']:.1f}"
            )
        return "\n".join(lines)


def annotations_from_json(raw: list) -> list[AnswerAnnotation]:
    if not isinstance(raw, list):
        raise AnnotationError([Issue("$", "annotations must be a JSON array")])
    answers = []
    for i, raw_answer in enumerate(raw):
        if not isinstance(raw_answer, dict):
            raise AnnotationError([Issue(f"$[{i}]", "answer must be an object")])
        raw_claims = raw_answer.get("claims", [])
        if not isinstance(raw_claims, list):
            raise AnnotationError([Issue(f"$[{i}].claims", "must be an array")])
        claims = []
        for j, raw_claim in enumerate(raw_claims):
            if not isinstance(raw_claim, dict):
                raise AnnotationError(
                    [Issue(f"$[{i}].claims[{j}]", "claim must be an object")]
                )
            raw_citations = raw_claim.get("citations", [])
            if not isinstance(raw_citations, list) or any(
                not isinstance(c, dict) for c in raw_citations
            ):
                raise AnnotationError(
                    [Issue(f"$[{i}].claims[{j}].citations", "must be an array of objects")]
                )
            citations = tuple(
                Citation(str(c.get("citation_id", f"cit{k}")), bool(c.get("valid", False)))
                for k, c in enumerate(raw_citations)
            )
            claims.append(
                Claim(
                    claim_id=str(raw_claim.get("claim_id", f"claim{j}")),
                    citations=citations,
                    justified=bool(raw_claim.get("justified", False)),
                    relevant=bool(raw_claim.get("relevant", False)),
                )
            )
        answers.append(
            AnswerAnnotation(
                answer_id=str(raw_answer.get("answer_id", f"answer{i}")),
                claims=tuple(claims),
            )
        )
    return answers


def complexity_from_json(raw: list) -> list[ComplexityAnnotation]:
    if not isinstance(raw, list):
        raise AnnotationError([Issue("$", "complexity must be a JSON array")])
    out = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict) or "answer_id" not in item:
            raise AnnotationError([Issue(f"$[{i}]", "complexity entry needs answer_id")])
        try:
            max_hops = int(item.get("max_hops", 0))
            num_concepts = int(item.get("num_concepts", 0))
        except (TypeError, ValueError):
            raise AnnotationError([Issue(f"$[{i}]", "hops/concepts must be integers")])
        if max_hops < 0 or num_concepts < 0:
            raise AnnotationError([Issue(f"$[{i}]", "hops/concepts must be >= 0")])
        out.append(ComplexityAnnotation(str(item["answer_id"]), max_hops, num_concepts))
    return out


def validate_annotations(annotations: list[AnswerAnnotation]) -> list[Issue]:
    """Flag claims that break the strictness chain: relevant => justified => cited."""
    issues = []
    for answer in annotations:
        for claim in answer.claims:
            element = f"{answer.answer_id}/{claim.claim_id}"
            if claim.justified and claim.valid_citations == 0:
                issues.append(Issue(element, "justified claim lacks valid citation"))
            if claim.relevant and not claim.justified:
                issues.append(Issue(element, "relevant implies justified"))
    return issues


def _mean_stdev(values: list[int]) -> dict:
    n = len(values)
    mean = sum(values) / n
    if n < 2:
        stdev = 0.0
    else:
        variance = sum((v - mean) ** 2 for v in values) / (n - 1)
        stdev = math.sqrt(variance)
    return {"mean": round(mean, 1), "stdev": round(stdev, 1), "n": n}


def compute_metrics(
    annotations: list[AnswerAnnotation],
    complexity: list[ComplexityAnnotation] | None = None,
    count_all_citations: bool = False,
) -> MetricsReport:
    """Compute the six verifiability metrics, plus complexity when given.

    citation_density counts valid citations per claim by default; set
    count_all_citations to include invalid ones.  Per-claim rates over zero
    claims (and the hallucination rate over zero citations) come out None.
    """
    if not annotations:
        raise AnnotationError([Issue("$", "no answers to score")])
    issues = validate_annotations(annotations)
    if issues:
        raise AnnotationError(issues)

    total_claims = 0
    total_citations = 0
    total_valid_citations = 0
    cited_claims = 0
    justified_claims = 0
    relevant_claims = 0
    for answer in annotations:
        for claim in answer.claims:
            total_claims += 1
            total_citations += len(claim.citations)
            total_valid_citations += claim.valid_citations
            if claim.valid_citations > 0:
                cited_claims += 1
            if claim.justified:
                justified_claims += 1
            if claim.relevant:
                relevant_claims += 1

    claim_density = total_claims / len(annotations)
    if total_claims > 0:
        density_count = total_citations if count_all_citations else total_valid_citations
        citation_density = density_count / total_claims
        citation_rate = 100.0 * cited_claims / total_claims
        justification_rate = 100.0 * justified_claims / total_claims
        relevance_rate = 100.0 * relevant_claims / total_claims
    else:
        citation_density = None
        citation_rate = None
        justification_rate = None
        relevance_rate = None
    if total_citations > 0:
        hallucination_rate = 100.0 * (total_citations - total_valid_citations) / total_citations
    else:
        hallucination_rate = None

    complexity_block = None
    if complexity:
        complexity_block = {
            "max_hops": _mean_stdev([c.max_hops for c in complexity]),
            "num_concepts": _mean_stdev([c.num_concepts for c in complexity]),
        }

    return MetricsReport(
        answers=len(annotations),
        claims=total_claims,
        citations=total_citations,
        claim_density=claim_density,
        citation_density=citation_density,
        hallucination_rate=hallucination_rate,
        citation_rate=citation_rate,
        justification_rate=justification_rate,
        relevance_rate=relevance_rate,
        complexity=complexity_block,
    )
