#!/usr/bin/env python3
"""Freezes tests/fixtures/lemma_reference.tsv.

Reference lemmas come from lemminflect's dictionary-backed lemmatizer,
which shares no code or data with the toolkit's rule tables.  Run once;
the output is committed and compared exactly by the unit tests.
"""
import os

from lemminflect import getAllInflections, getLemma

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "tests", "fixtures", "lemma_reference.tsv")

VERBS = """
look want walk talk stop plan hug chat drop shop jog admit prefer
like make hope move love live smile bake hate use close save arrive
try study carry worry cry reply marry copy play stay enjoy pray
watch fix miss push pass wish kiss relax finish touch reach teach
die lie tie see agree free flee
decide include provide describe compare prepare ignore explore create
celebrate graduate relate manage change arrange judge charge freeze
realize organize settle handle struggle dance notice produce introduce
visit open listen happen answer offer enter consider remember wonder
travel cancel develop gallop edit limit order cover deliver
go take give write drive eat fall forget begin swim run sit get break
choose speak steal buy bring think teach catch fight seek sell tell
""".split()

NOUNS = """
doctor hospital specialist friend dog cat car house city party baby
story family country lady company body box bus class church dish
fox match wish glass kiss potato hero tomato echo leaf knife wife
wolf life shelf child man woman foot tooth mouse person day key toy
boy game idea area pizza movie cookie shoe toe radio photo video
""".split()

ADJS = """
big hot sad thin fat wet happy easy busy early funny pretty nice
wide safe late large strange simple gentle fast tall small cheap
cold long strong young old great high good bad
""".split()


def rows():
    seen = set()
    for words, upos, tag in ((VERBS, "VERB", "VERB"), (NOUNS, "NOUN", "NOUN"),
                             (ADJS, "ADJ", "ADJ")):
        for base in words:
            forms = {base}
            for _, fs in getAllInflections(base, upos=upos).items():
                forms.update(f.lower() for f in fs)
            for form in sorted(forms):
                if (form, tag) in seen or not form.isalpha():
                    continue
                lemmas = getLemma(form, upos=upos)
                if not lemmas:
                    continue
                seen.add((form, tag))
                yield form, tag, lemmas[0].lower()


def main():
    data = sorted(rows())
    with open(OUT, "w") as fh:
        fh.write("# form<TAB>pos<TAB>reference lemma (lemminflect 0.2.3), frozen\n")
        for form, tag, lemma in data:
            fh.write(f"{form}\t{tag}\t{lemma}\n")
    print(len(data), "rows ->", OUT)


if __name__ == "__main__":
    main()
