"""Smoke test for the silver_ner extension module.

Build and install first:
    pip install --no-build-isolation -e crates/python
Then run:
    python3 python/smoke_test.py
"""

from pathlib import Path

import silver_ner

ROOT = Path(__file__).resolve().parent.parent
MINIWIKI = ROOT / "crates" / "core" / "tests" / "fixtures" / "miniwiki"


def check_corpus_roundtrip():
    corpus = silver_ner.Corpus(
        [(["Երևան", "քաղաք", "։"], ["B-LOC", "O", "O"]),
         (["Խաչատուր", "Աբովյան"], ["B-PER", "I-PER"])],
        provenance=["tool smoke"],
    )
    text = corpus.to_conll()
    back = silver_ner.Corpus.from_conll(text)
    assert back.sentences == corpus.sentences
    assert back.provenance == ["tool smoke"]
    assert corpus.stats() == {"sentences": 2, "tokens": 5, "PER": 1, "ORG": 0, "LOC": 1}
    assert corpus.validate() == []
    broken = silver_ner.Corpus([(["x"], ["I-ORG"])])
    assert len(broken.validate()) == 1


def check_scoring():
    assert silver_ner.chunks(["B-PER", "I-PER", "O", "B-LOC"]) == [("PER", 0, 1), ("LOC", 3, 3)]
    gold = silver_ner.Corpus.read(str(MINIWIKI / "expected.conll"))
    report = silver_ner.evaluate(gold, gold)
    assert report.scores()["overall"] == (100.0, 100.0, 100.0)
    assert "Overall" in report.table()
    labels, matrix = silver_ner.confusion(gold, gold)
    assert labels[0] == "O" and sum(map(sum, matrix)) == sum(len(t) for t, _ in gold.sentences)


def check_viterbi():
    zeros = [[0.0] * 7 for _ in range(7)]
    assert silver_ner.viterbi([[0.0] * 7] * 3, [0.0] * 7, zeros) == ["O", "O", "O"]
    emissions = [[0, 0, 5, 0, 0, 0, 0], [0, 0, 5, 0, 0, 0, 0]]
    # I-PER cannot open a sentence, so the decoder starts with B-PER.
    assert silver_ner.viterbi(emissions, [0.0] * 7, zeros) == ["B-PER", "I-PER"]


def check_tagger():
    corpus = silver_ner.synthetic_corpus(50, 1)
    tagger = silver_ner.Tagger.train(corpus, epochs=20, seed=1)
    assert silver_ner.evaluate(corpus, tagger.tag_corpus(corpus)).f1 == 100.0
    again = silver_ner.Tagger.from_text(tagger.to_text())
    tokens, _ = corpus.sentences[0]
    assert again.tag(tokens) == tagger.tag(tokens)
    train, dev = corpus.split(0.8, 3)
    assert len(train) == 40 and len(dev) == 10


def check_generate():
    pages = (MINIWIKI / "pages.xml").read_text(encoding="utf-8")
    entities = (MINIWIKI / "entities.jsonl").read_text(encoding="utf-8")
    corpus, counters = silver_ner.generate(pages, entities, jobs=2)
    assert corpus.to_conll() == (MINIWIKI / "expected.conll").read_text(encoding="utf-8")
    assert counters["sentences_selected"] == len(corpus)
    plain, _ = silver_ner.generate(pages, entities, config="provenance = false\n")
    assert plain.provenance == [] and plain.sentences == corpus.sentences


def main():
    for check in (check_corpus_roundtrip, check_scoring, check_viterbi, check_tagger, check_generate):
        check()
        print(f"ok  {check.__name__}")
    print(f"silver_ner {silver_ner.__version__}: all smoke checks passed")


if __name__ == "__main__":
    main()
