"""Project state for interactive sense annotation.

All mutations go through a single append-only JSONL log per project;
replaying the log reconstructs the exact current state, which keeps crash
recovery and auditing trivial at the volumes this tool works at (thousands
of sentences per language).

Project directory layout:

    <root>/project.json            id, language, lemma specs
    <root>/sentences/<lemma>.jsonl canonical sentence records
    <root>/embeddings/<lemma>.semb occurrence embeddings (sidecar output)
    <root>/projections/<lemma>.json latest clustering + 2D view
    <root>/log.jsonl               append-only event log
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from .. import numerics
from ..corpus import LemmaSpec, SentenceRecord, read_sentences_jsonl, write_sentences_jsonl
from ..embedstore import read_embeddings, validate_alignment
from ..errors import ConflictError, DataError, NotFoundError, ValidationError
from ..gold import GoldRecord

PROVENANCES = ("manual", "model-suggested", "verified")
GOLD_PROVENANCES = ("manual", "verified")
DEFAULT_MIN_PER_SENSE = 30


@dataclass(frozen=True)
class SenseDef:
    sense_id: str
    gloss: str
    gloss_en: str | None = None

    def __post_init__(self):
        if not self.sense_id:
            raise ValidationError("sense_id must be non-empty")


@dataclass(frozen=True)
class SenseAnnotation:
    sentence_id: str
    lemma: str
    sense_id: str
    annotator: str
    provenance: str = "manual"
    timestamp: float | None = None  # UTC seconds; filled at append time if None

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValidationError(
                f"provenance must be one of {PROVENANCES}, got {self.provenance!r}"
            )


@dataclass(frozen=True)
class AnnotationEvent:
    """One replayable log entry; revision is its 1-based position in the log."""

    kind: str  # add_sense | assign | unassign
    payload: dict
    revision: int

    def to_json(self) -> dict:
        return {"kind": self.kind, "revision": self.revision, **self.payload}


@dataclass(frozen=True)
class UnassignResult:
    status: str  # "removed" or "noop"
    revision: int


@dataclass
class _State:
    """Pure fold of the event log: sense inventory plus current annotations."""

    senses: dict[str, dict[str, SenseDef]]
    current: dict[tuple[str, str, str], dict]  # (sentence, lemma, annotator) -> entry

    @classmethod
    def empty(cls) -> "_State":
        return cls(senses={}, current={})

    def apply(self, event: AnnotationEvent) -> None:
        p = event.payload
        if event.kind == "add_sense":
            self.senses.setdefault(p["lemma"], {})[p["sense_id"]] = SenseDef(
                sense_id=p["sense_id"], gloss=p.get("gloss", ""), gloss_en=p.get("gloss_en")
            )
        elif event.kind == "assign":
            key = (p["sentence_id"], p["lemma"], p["annotator"])
            self.current[key] = {
                "sense_id": p["sense_id"],
                "provenance": p["provenance"],
                "revision": event.revision,
                "timestamp": p["timestamp"],
            }
        elif event.kind == "unassign":
            self.current.pop((p["sentence_id"], p["lemma"], p["annotator"]), None)
        else:
            raise DataError(f"unknown event kind {event.kind!r} in log")


def replay(events: list[AnnotationEvent]) -> _State:
    state = _State.empty()
    for event in events:
        state.apply(event)
    return state


class ProjectStore:
    """One annotation project rooted at a directory; writes are serialized."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        meta_path = self.root / "project.json"
        if not meta_path.exists():
            raise DataError(f"not a project directory (no project.json): {self.root}")
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        self.project_id: str = meta["id"]
        self.lang: str = meta["lang"]
        self.lemma_specs: dict[str, LemmaSpec] = {}
        for spec in meta.get("lemmas", []):
            self.lemma_specs[spec["lemma"]] = LemmaSpec(
                lemma=spec["lemma"],
                forms=tuple(spec["forms"]),
                lang=spec.get("lang", self.lang),
                gloss_hints=tuple(spec.get("gloss_hints", [])),
            )
        self._lock = threading.Lock()
        self._sentences: dict[str, dict[str, SentenceRecord]] = {}
        self.events: list[AnnotationEvent] = []
        self._load_log()
        self.state = replay(self.events)

    # -- creation ----------------------------------------------------------

    @classmethod
    def create(
        cls,
        root: str | Path,
        project_id: str,
        lang: str,
        lemmas: list[LemmaSpec] | None = None,
        senses: dict[str, list[SenseDef]] | None = None,
    ) -> "ProjectStore":
        root = Path(root)
        if (root / "project.json").exists():
            raise ValidationError(f"project already exists at {root}")
        root.mkdir(parents=True, exist_ok=True)
        for sub in ("sentences", "embeddings", "projections"):
            (root / sub).mkdir(exist_ok=True)
        meta = {
            "id": project_id,
            "lang": lang,
            "lemmas": [
                {
                    "lemma": spec.lemma,
                    "forms": list(spec.forms),
                    "lang": spec.lang,
                    "gloss_hints": list(spec.gloss_hints),
                }
                for spec in (lemmas or [])
            ],
        }
        (root / "project.json").write_text(
            json.dumps(meta, ensure_ascii=False, indent=2), encoding="utf-8"
        )
        store = cls(root)
        for lemma, sense_defs in (senses or {}).items():
            for sd in sense_defs:
                store.add_sense(lemma, sd)
        return store

    # -- log plumbing --------------------------------------------------------

    @property
    def log_path(self) -> Path:
        return self.root / "log.jsonl"

    def _load_log(self) -> None:
        self.events = []
        if not self.log_path.exists():
            return
        with open(self.log_path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise DataError(f"{self.log_path}: corrupt log line {lineno}: {exc.msg}") from exc
                kind = obj.pop("kind")
                revision = obj.pop("revision")
                self.events.append(AnnotationEvent(kind=kind, payload=obj, revision=revision))

    def _append(self, kind: str, payload: dict) -> int:
        event = AnnotationEvent(kind=kind, payload=payload, revision=len(self.events) + 1)
        with open(self.log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event.to_json(), ensure_ascii=False) + "\n")
            fh.flush()
        self.events.append(event)
        self.state.apply(event)
        return event.revision

    @property
    def revision(self) -> int:
        return len(self.events)

    # -- sentences -----------------------------------------------------------

    def lemmas(self) -> list[str]:
        known = set(self.lemma_specs)
        for path in sorted((self.root / "sentences").glob("*.jsonl")):
            known.add(path.stem)
        return sorted(known)

    def sentences_for(self, lemma: str) -> dict[str, SentenceRecord]:
        if lemma not in self._sentences:
            path = self.root / "sentences" / f"{lemma}.jsonl"
            if not path.exists():
                self._sentences[lemma] = {}
            else:
                self._sentences[lemma] = {rec.id: rec for rec in read_sentences_jsonl(path)}
        return self._sentences[lemma]

    def import_sentences(self, lemma: str, records: list[SentenceRecord]) -> None:
        write_sentences_jsonl(records, self.root / "sentences" / f"{lemma}.jsonl")
        self._sentences[lemma] = {rec.id: rec for rec in records}

    # -- senses ---------------------------------------------------------------

    def senses_for(self, lemma: str) -> list[SenseDef]:
        return list(self.state.senses.get(lemma, {}).values())

    def add_sense(self, lemma: str, sense: SenseDef) -> int:
        with self._lock:
            if sense.sense_id in self.state.senses.get(lemma, {}):
                raise ValidationError(f"sense {sense.sense_id!r} already exists for lemma {lemma!r}")
            return self._append(
                "add_sense",
                {
                    "lemma": lemma,
                    "sense_id": sense.sense_id,
                    "gloss": sense.gloss,
                    "gloss_en": sense.gloss_en,
                    "timestamp": time.time(),
                },
            )

    # -- annotation ------------------------------------------------------------

    def assign(self, ann: SenseAnnotation) -> int:
        """Record an annotation; identical repeat returns the original revision."""
        with self._lock:
            if ann.lemma not in self.lemmas():
                raise NotFoundError(f"unknown lemma {ann.lemma!r}")
            if ann.sense_id not in self.state.senses.get(ann.lemma, {}):
                raise NotFoundError(f"unknown sense {ann.sense_id!r} for lemma {ann.lemma!r}")
            if ann.sentence_id not in self.sentences_for(ann.lemma):
                raise NotFoundError(f"unknown sentence {ann.sentence_id!r} for lemma {ann.lemma!r}")
            key = (ann.sentence_id, ann.lemma, ann.annotator)
            existing = self.state.current.get(key)
            if (
                existing is not None
                and existing["sense_id"] == ann.sense_id
                and existing["provenance"] == ann.provenance
            ):
                return existing["revision"]
            ts = ann.timestamp if ann.timestamp is not None else time.time()
            return self._append(
                "assign",
                {
                    "sentence_id": ann.sentence_id,
                    "lemma": ann.lemma,
                    "sense_id": ann.sense_id,
                    "annotator": ann.annotator,
                    "provenance": ann.provenance,
                    "timestamp": ts,
                },
            )

    def unassign(self, sentence_id: str, lemma: str, annotator: str) -> UnassignResult:
        with self._lock:
            key = (sentence_id, lemma, annotator)
            if key not in self.state.current:
                return UnassignResult(status="noop", revision=self.revision)
            revision = self._append(
                "unassign",
                {
                    "sentence_id": sentence_id,
                    "lemma": lemma,
                    "annotator": annotator,
                    "timestamp": time.time(),
                },
            )
            return UnassignResult(status="removed", revision=revision)

    def current_label(self, sentence_id: str, lemma: str, annotator: str | None = None) -> dict | None:
        """Latest current annotation for a sentence; across annotators when
        no annotator is given (highest revision wins)."""
        if annotator is not None:
            return self.state.current.get((sentence_id, lemma, annotator))
        best = None
        for (sid, lem, _), entry in self.state.current.items():
            if sid == sentence_id and lem == lemma:
                if best is None or entry["revision"] > best["revision"]:
                    best = entry
        return best

    def _merged_current(self, annotator: str | None) -> dict[tuple[str, str], dict]:
        merged: dict[tuple[str, str], dict] = {}
        for (sid, lemma, ann), entry in self.state.current.items():
            if annotator is not None and ann != annotator:
                continue
            key = (sid, lemma)
            if key not in merged or entry["revision"] > merged[key]["revision"]:
                merged[key] = {**entry, "annotator": ann}
        return merged

    # -- views & projections -----------------------------------------------------

    def projection_path(self, lemma: str) -> Path:
        return self.root / "projections" / f"{lemma}.json"

    def recompute(
        self,
        lemma: str,
        k: int | None = None,
        method: str = "mds",
        seed: int = 42,
        cluster: str = "kmeans",
    ) -> dict:
        """Cluster the lemma's embeddings and project them to 2D; caches the result.

        k defaults to the lemma's sense-inventory size when at least two
        senses are registered, else 2.
        """
        if lemma not in self.lemmas():
            raise NotFoundError(f"unknown lemma {lemma!r}")
        semb_path = self.root / "embeddings" / f"{lemma}.semb"
        if not semb_path.exists():
            raise ConflictError(f"no embeddings for lemma {lemma!r}; run the embedder first")
        matrix = read_embeddings(semb_path)
        records = list(self.sentences_for(lemma).values())
        if records:
            validate_alignment(matrix, records)
        if k is None:
            n_senses = len(self.state.senses.get(lemma, {}))
            k = n_senses if n_senses >= 2 else 2
        k = min(k, matrix.n)

        if cluster == "kmeans":
            labels = numerics.kmeans(matrix, k=k, seed=seed)
        elif cluster == "agglomerative":
            labels = numerics.agglomerative(numerics.pairwise_cosine_distance(matrix), k=k)
        else:
            raise ValidationError(f"unknown clustering method {cluster!r}")

        if method == "mds":
            proj = numerics.classical_mds(numerics.pairwise_cosine_distance(matrix), ids=matrix.ids)
        elif method == "pca":
            proj = numerics.pca2(matrix)
        else:
            raise ValidationError(f"unknown projection method {method!r}")

        export = numerics.export_projection(lemma, proj, labels)
        export["k"] = k
        export["seed"] = seed
        export["cluster"] = cluster
        tmp = self.projection_path(lemma).with_suffix(".json.tmp")
        tmp.write_text(json.dumps(export, ensure_ascii=False), encoding="utf-8")
        tmp.replace(self.projection_path(lemma))
        return export

    def view(self, lemma: str, annotator: str | None = None) -> dict:
        """Everything the annotation UI needs for one lemma, arrays aligned by index."""
        if lemma not in self.lemmas():
            raise NotFoundError(f"unknown lemma {lemma!r}")
        path = self.projection_path(lemma)
        if not path.exists():
            raise ConflictError(f"no projection for lemma {lemma!r}: recompute required")
        projection = json.loads(path.read_text(encoding="utf-8"))
        records = self.sentences_for(lemma)

        sense_labels = []
        for sid in projection["ids"]:
            entry = self.current_label(sid, lemma, annotator)
            sense_labels.append(entry["sense_id"] if entry else None)

        counts: dict[str, int] = {}
        merged = self._merged_current(annotator)
        for (sid, lem), entry in merged.items():
            if lem == lemma:
                counts[entry["sense_id"]] = counts.get(entry["sense_id"], 0) + 1

        sentences = []
        for sid in projection["ids"]:
            rec = records.get(sid)
            sentences.append(
                None
                if rec is None
                else {
                    "text": rec.text,
                    "target_span": list(rec.target_span),
                    "surface_form": rec.surface_form,
                }
            )

        return {
            "lemma": lemma,
            "method": projection["method"],
            "ids": projection["ids"],
            "points": projection["points"],
            "clusters": projection["clusters"],
            "senses": sense_labels,
            "sentences": sentences,
            "sense_inventory": [
                {"sense_id": sd.sense_id, "gloss": sd.gloss, "gloss_en": sd.gloss_en}
                for sd in self.senses_for(lemma)
            ],
            "counts": counts,
            "revision": self.revision,
        }

    # -- export ---------------------------------------------------------------

    def export_gold(
        self, min_per_sense: int = DEFAULT_MIN_PER_SENSE, annotator: str | None = None
    ) -> list[GoldRecord]:
        """Current manual/verified annotations for lemmas with at least two
        senses attested by >= min_per_sense sentences each.

        With no annotator given, the latest annotation across annotators wins
        per sentence; pass the adjudicator's identity to restrict to one.
        """
        merged = self._merged_current(annotator)
        by_lemma: dict[str, dict[str, str]] = {}
        for (sid, lemma), entry in merged.items():
            if entry["provenance"] not in GOLD_PROVENANCES:
                continue
            by_lemma.setdefault(lemma, {})[sid] = entry["sense_id"]

        out: list[GoldRecord] = []
        for lemma in sorted(by_lemma):
            sense_counts: dict[str, int] = {}
            for sense_id in by_lemma[lemma].values():
                sense_counts[sense_id] = sense_counts.get(sense_id, 0) + 1
            attested = sum(1 for c in sense_counts.values() if c >= min_per_sense)
            if attested < 2:
                continue
            records = self.sentences_for(lemma)
            for sid in sorted(by_lemma[lemma]):
                if sid not in records:
                    continue
                entry = merged[(sid, lemma)]
                out.append(
                    GoldRecord(
                        sentence=records[sid],
                        sense_id=entry["sense_id"],
                        annotator=entry["annotator"],
                        provenance=entry["provenance"],
                    )
                )
        return out
