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

"""Writes the cross-language golden files used by the C++ tests.

golden.ted: 3 sentences, dim 4, layers [-1, 12]. Value of sentence s,
layer slot l, token t, coordinate j is s + l/2 + t/4 + j/8 (exact in f32).
golden.stt: ids 7 and 3 with counts 2 and 5, vectors [0.5 * id + j].
"""

import argparse
import pathlib

import numpy as np

from formats import read_ted1, write_ted1, write_stt1

TEXTS = ["a man sings", "héllo", "x"]
IDS = [[2, 37, 56, 3], [93], [145, 4]]


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", required=True)
    args = parser.parse_args()
    out = pathlib.Path(args.out)
    dim = 4
    layers = [-1, 12]
    sentences = []
    for s, (text, ids) in enumerate(zip(TEXTS, IDS)):
        rows = []
        for l in range(len(layers)):
            t = np.arange(len(ids))[:, None] / 4.0
            j = np.arange(dim)[None, :] / 8.0
            rows.append((s + l / 2.0 + t + j).astype(np.float32))
        sentences.append((text, ids, rows))
    write_ted1(out / "golden.ted", dim, layers, sentences)
    back = read_ted1(out / "golden.ted")
    assert back[0] == dim and back[1] == layers
    write_stt1(out / "golden.stt", 3,
               [(7, 2, [3.5, 4.5, 5.5]), (3, 5, [1.5, 2.5, 3.5])])


if __name__ == "__main__":
    main()
