# Copyright 2026 The embshape Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes a small WordPiece vocabulary and reference tokenizations.

Output: <out>/vocab_small.txt and <out>/tokenizer_golden.tsv, one
"text<TAB>space-separated ids" line per case. Reference ids come from the
Hugging Face BertTokenizer (uncased, accents stripped).
"""

import argparse
import pathlib

from transformers import BertTokenizer

SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
PUNCT = list(".,;:!?'\"()-/&$%@#*+=<>[]{}") + ["’", "“", "”", "—", "¿"]
WORDS = """the a an of to and in is was for on that with as by it at from his her
man woman men women dog cat child children sing sings singing play plays playing
guitar piano ball run runs running walk walks street car road house sentence means
this about which synonym dictionary paraphrase from cafe naive resume hello world
new york city two three one is are be been not no yes very good bad big small
un ##able ##ing ##ed ##s ##er ##ly ##ness ##ment play ##ful happy ##ily ##y
re ##sume ca ##fe na ##ive token ##izer ##ization emb ##ed ##ding ##dings 1 2 3
10 ##0 ##00 19 ##99 x ##x ##xx""".split()
CASES = [
    "A man is playing a guitar.",
    "HELLO World!",
    "The children are singing, and the dogs run.",
    "Café naïve résumé",
    "CAFÉ NAÏVE",
    "unhappy players playfully played",
    "Tokenization of embeddings is tokenizable?",
    "New York City (NYC) - 1999",
    "x xx xxx xxxx",
    "“Quoted” text — with dashes’",
    "¿Qué?",
    "tabs\tand\nnewlines\r\nmixed   spaces",
    "control\u0007chars\u0000here",
    "zero​width",
    "emoji 😀 here",
    "a" * 120,
    "supercalifragilisticexpialidocious",
    "The dog's ball & the cat's toy; 10% of 2 + 3 = 5",
    "runs running runner",
    "the [MASK] stays whole but [mask] and [Mask] do not",
    "glued[MASK]tokens and [SEP] [CLS]",
    "ümlaut Ångström",
    "full　width space",
    "non breaking",
    "ﬁ ligature",
    "",
]


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", required=True)
    args = parser.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    vocab = []
    for tok in SPECIALS + PUNCT + WORDS:
        if tok not in vocab:
            vocab.append(tok)
    vocab_path = out / "vocab_small.txt"
    vocab_path.write_text("\n".join(vocab) + "\n", encoding="utf-8")

    tok = BertTokenizer(str(vocab_path), do_lower_case=True)
    lines = []
    for text in CASES:
        if not text:
            continue
        ids = tok.convert_tokens_to_ids(tok.tokenize(text))
        escaped = text.encode("unicode_escape").decode("ascii")
        lines.append(escaped + "\t" + " ".join(str(i) for i in ids))
    (out / "tokenizer_golden.tsv").write_text("\n".join(lines) + "\n", encoding="ascii")


if __name__ == "__main__":
    main()
