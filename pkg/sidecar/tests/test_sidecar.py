import json

import numpy as np
import pytest

from senseloom.corpus import SentenceRecord, write_sentences_jsonl
from senseloom.embedstore import read_embeddings, validate_alignment
from senseloom.errors import ValidationError
from senseloom.wiceval import join_scores, read_scores_jsonl

from senseloom_sidecar.backends import HashBackend, load_backend
from senseloom_sidecar.cli import main
from senseloom_sidecar.embed import embed_occurrences, score_pairs


def make_records(texts_spans, lemma="bat"):
    out = []
    for i, (text, span) in enumerate(texts_spans):
        out.append(
            SentenceRecord(
                id=f"s{i}", lang="en", lemma=lemma, surface_form=text[span[0] : span[1]],
                text=text, target_span=span, source="t",
            )
        )
    return out


BAT_CAVE = ("A bat flew out of the cave as the sun set.", (2, 5))
BAT_SWING = ("He swung the bat with all his strength.", (13, 16))


@pytest.fixture()
def sentences_file(tmp_path):
    records = make_records([BAT_CAVE, BAT_SWING])
    path = tmp_path / "bat.jsonl"
    write_sentences_jsonl(records, path)
    return path, records


class TestEmbedOccurrences:
    def test_shape_and_core_validation(self, tmp_path, sentences_file):
        path, records = sentences_file
        out = tmp_path / "bat.semb"
        matrix = embed_occurrences(path, "hash:64", out)
        assert (matrix.n, matrix.d) == (2, 64)
        loaded = read_embeddings(out)  # core reader re-validates the format
        assert loaded.ids == ["s0", "s1"]
        assert loaded.model_id == "hash:64"
        validate_alignment(loaded, records)

    def test_duplicated_sentence_identical_rows(self, tmp_path):
        records = make_records([BAT_CAVE, BAT_CAVE, BAT_SWING])
        # distinct ids, same text/span -> rows 0 and 1 must be bit-identical
        path = tmp_path / "dup.jsonl"
        write_sentences_jsonl(records, path)
        out = tmp_path / "dup.semb"
        matrix = embed_occurrences(path, "hash:64", out)
        assert matrix.data[0].tobytes() == matrix.data[1].tobytes()
        assert matrix.data[0].tobytes() != matrix.data[2].tobytes()

    def test_ids_preserve_input_order(self, tmp_path):
        records = make_records([BAT_SWING, BAT_CAVE])
        path = tmp_path / "o.jsonl"
        write_sentences_jsonl(records, path)
        matrix = embed_occurrences(path, "hash:32", tmp_path / "o.semb")
        assert matrix.ids == ["s0", "s1"]

    def test_mixed_lemmas_rejected(self, tmp_path):
        records = make_records([BAT_CAVE]) + make_records([BAT_SWING], lemma="club")
        records[1] = SentenceRecord(
            id="other", lang="en", lemma="club", surface_form="bat",
            text=BAT_SWING[0], target_span=BAT_SWING[1], source="t",
        )
        path = tmp_path / "m.jsonl"
        write_sentences_jsonl(records, path)
        with pytest.raises(ValidationError, match="per-lemma"):
            embed_occurrences(path, "hash:16", tmp_path / "m.semb")

    def test_deterministic_output_bytes(self, tmp_path, sentences_file):
        path, _ = sentences_file
        embed_occurrences(path, "hash:64", tmp_path / "a.semb")
        embed_occurrences(path, "hash:64", tmp_path / "b.semb")
        assert (tmp_path / "a.semb").read_bytes() == (tmp_path / "b.semb").read_bytes()


def _pairs_file(tmp_path, rows):
    path = tmp_path / "pairs.jsonl"
    with open(path, "w", encoding="utf-8") as fh:
        for r in rows:
            fh.write(json.dumps(r) + "\n")
    return path


class TestScorePairs:
    def test_identical_sentences_near_zero(self, tmp_path):
        rows = [
            {
                "pair_id": "p0",
                "sentence1": BAT_CAVE[0], "span1": list(BAT_CAVE[1]),
                "sentence2": BAT_CAVE[0], "span2": list(BAT_CAVE[1]),
                "label": 1,
            }
        ]
        out = tmp_path / "scores.jsonl"
        score_pairs(_pairs_file(tmp_path, rows), "hash:64", out)
        scores = read_scores_jsonl(out)
        assert scores[0][1] < 0.05

    def test_output_matches_eval_schema(self, tmp_path):
        rows = [
            {
                "pair_id": f"p{i}",
                "sentence1": BAT_CAVE[0], "span1": list(BAT_CAVE[1]),
                "sentence2": BAT_SWING[0], "span2": list(BAT_SWING[1]),
                "label": 0,
            }
            for i in range(3)
        ]
        out = tmp_path / "scores.jsonl"
        n = score_pairs(_pairs_file(tmp_path, rows), "hash:64", out)
        assert n == 3
        scored = join_scores({f"p{i}": 0 for i in range(3)}, read_scores_jsonl(out))
        assert all(0.0 <= p.distance <= 2.0 for p in scored)

    def test_swap_symmetry(self, tmp_path):
        forward = [
            {
                "pair_id": "p0",
                "sentence1": BAT_CAVE[0], "span1": list(BAT_CAVE[1]),
                "sentence2": BAT_SWING[0], "span2": list(BAT_SWING[1]),
                "label": 0,
            }
        ]
        backward = [
            {
                "pair_id": "p0",
                "sentence1": BAT_SWING[0], "span1": list(BAT_SWING[1]),
                "sentence2": BAT_CAVE[0], "span2": list(BAT_CAVE[1]),
                "label": 0,
            }
        ]
        out_f, out_b = tmp_path / "f.jsonl", tmp_path / "b.jsonl"
        score_pairs(_pairs_file(tmp_path, forward), "hash:64", out_f)
        score_pairs(_pairs_file(tmp_path, backward), "hash:64", out_b)
        df = read_scores_jsonl(out_f)[0][1]
        db = read_scores_jsonl(out_b)[0][1]
        assert abs(df - db) < 1e-6


class TestHashBackend:
    def test_different_contexts_differ(self):
        backend = HashBackend(dim=64)
        vectors = backend.encode([BAT_CAVE, BAT_SWING])
        assert not np.allclose(vectors[0], vectors[1])

    def test_unit_norm(self):
        backend = HashBackend(dim=32)
        vectors = backend.encode([BAT_CAVE])
        assert np.linalg.norm(vectors[0]) == pytest.approx(1.0, abs=1e-6)

    def test_load_backend_parses_dim(self):
        assert load_backend("hash:128").dim == 128
        assert load_backend("hash").dim == 64


class TestCli:
    def test_embed_and_score(self, tmp_path, sentences_file, capsys):
        path, _ = sentences_file
        semb = tmp_path / "out.semb"
        assert main(["embed", "--input", str(path), "--out", str(semb)]) == 0
        assert "2 x 64" in capsys.readouterr().out

        rows = [
            {
                "pair_id": "p0",
                "sentence1": BAT_CAVE[0], "span1": list(BAT_CAVE[1]),
                "sentence2": BAT_SWING[0], "span2": list(BAT_SWING[1]),
                "label": 0,
            }
        ]
        pairs = _pairs_file(tmp_path, rows)
        scores = tmp_path / "scores.jsonl"
        assert main(["score", "--pairs", str(pairs), "--out", str(scores)]) == 0
        assert len(read_scores_jsonl(scores)) == 1

    def test_unknown_flag_64(self, capsys):
        assert main(["embed", "--bogus"]) == 64

    def test_missing_input_2(self, tmp_path, capsys):
        assert main(["embed", "--input", str(tmp_path / "ghost.jsonl"), "--out", str(tmp_path / "o")]) == 2


# ---------------------------------------------------------------------------
# transformers backend against a tiny local model (offline)

transformers = pytest.importorskip("transformers")


@pytest.fixture(scope="module")
def tiny_model_dir(tmp_path_factory):
    import torch
    from transformers import BertConfig, BertModel, BertTokenizerFast

    model_dir = tmp_path_factory.mktemp("tinybert")
    vocab = [
        "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
        "a", "bat", "flew", "out", "of", "the", "cave", "as", "sun", "set",
        "he", "swung", "with", "all", "his", "strength", ".",
    ]
    vocab_file = model_dir / "vocab.txt"
    vocab_file.write_text("\n".join(vocab) + "\n", encoding="utf-8")
    tokenizer = BertTokenizerFast(vocab_file=str(vocab_file), do_lower_case=True)
    tokenizer.save_pretrained(model_dir)

    torch.manual_seed(0)
    config = BertConfig(
        vocab_size=len(vocab), hidden_size=32, num_hidden_layers=2,
        num_attention_heads=2, intermediate_size=64, max_position_embeddings=64,
    )
    BertModel(config).save_pretrained(model_dir)
    return model_dir


class TestTransformersBackend:
    def test_embed_shapes_and_determinism(self, tmp_path, tiny_model_dir):
        records = make_records([BAT_CAVE, BAT_CAVE, BAT_SWING])
        path = tmp_path / "s.jsonl"
        write_sentences_jsonl(records, path)
        out = tmp_path / "s.semb"
        matrix = embed_occurrences(path, str(tiny_model_dir), out)
        assert (matrix.n, matrix.d) == (3, 32)
        assert matrix.data[0].tobytes() == matrix.data[1].tobytes()
        loaded = read_embeddings(out)
        validate_alignment(loaded, records)

    def test_mean_last_4_policy_differs_from_last(self, tmp_path, tiny_model_dir):
        from senseloom_sidecar.backends import TransformersBackend

        last = TransformersBackend(str(tiny_model_dir), layer_policy="last")
        mean4 = TransformersBackend(str(tiny_model_dir), layer_policy="mean-last-4")
        v1 = last.encode([BAT_CAVE])
        v2 = mean4.encode([BAT_CAVE])
        assert not np.allclose(v1, v2)

    def test_truncated_span_raises_with_record_id(self, tiny_model_dir):
        from senseloom_sidecar.backends import TransformersBackend

        backend = TransformersBackend(str(tiny_model_dir))
        backend.tokenizer.model_max_length = 4
        long_text = "a " * 40 + "bat"
        span = (len(long_text) - 3, len(long_text))
        with pytest.raises(ValidationError, match="rec-9"):
            backend.encode([(long_text, span)], record_ids=["rec-9"])

    def test_score_pairs_with_model(self, tmp_path, tiny_model_dir):
        rows = [
            {
                "pair_id": "same",
                "sentence1": BAT_CAVE[0], "span1": list(BAT_CAVE[1]),
                "sentence2": BAT_CAVE[0], "span2": list(BAT_CAVE[1]),
                "label": 1,
            },
        ]
        out = tmp_path / "ms.jsonl"
        score_pairs(_pairs_file(tmp_path, rows), str(tiny_model_dir), out)
        assert read_scores_jsonl(out)[0][1] < 0.05
