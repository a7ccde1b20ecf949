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

"""Writes a multinomial logistic regression reference fit.

The C++ classifier minimizes mean cross-entropy + (l2 / 2) * |W|^2 with an
unpenalized bias. scikit-learn minimizes C * sum(cross-entropy) + |W|^2 / 2,
which is the same problem for C = 1 / (n * l2).

Layout of softmax_reference.txt:
  n d classes l2
  n lines: label x_1 .. x_d
  classes lines: intercept w_1 .. w_d
"""

import argparse
import pathlib

import numpy as np
from sklearn.linear_model import LogisticRegression


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", required=True)
    args = parser.parse_args()
    rng = np.random.default_rng(7)
    n, d, classes, l2 = 90, 3, 3, 0.01
    centers = rng.normal(0.0, 1.5, size=(classes, d))
    labels = np.arange(n) % classes
    x = centers[labels] + rng.normal(0.0, 1.0, size=(n, d))
    model = LogisticRegression(C=1.0 / (n * l2), tol=1e-12, max_iter=100000)
    model.fit(x, labels)
    lines = ["%d %d %d %r" % (n, d, classes, l2)]
    for label, row in zip(labels, x):
        lines.append(" ".join([str(label)] + [repr(float(v)) for v in row]))
    for c in range(classes):
        values = [model.intercept_[c]] + list(model.coef_[c])
        lines.append(" ".join(repr(float(v)) for v in values))
    path = pathlib.Path(args.out) / "softmax_reference.txt"
    path.write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
