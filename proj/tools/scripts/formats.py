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

"""Readers and writers for the TED1 dump and STT1 table formats.

All integers and floats are little-endian.
"""

import struct

import numpy as np


def write_ted1(path, dim, layers, sentences):
    """sentences: list of (text, ids, [array(token_count, dim) per layer])."""
    with open(path, "wb") as f:
        f.write(b"TED1")
        f.write(struct.pack("<III", 1, dim, len(layers)))
        f.write(struct.pack("<%di" % len(layers), *layers))
        f.write(struct.pack("<I", len(sentences)))
        for text, ids, rows in sentences:
            raw = text.encode("utf-8")
            f.write(struct.pack("<I", len(raw)))
            f.write(raw)
            f.write(struct.pack("<I", len(ids)))
            f.write(struct.pack("<%dI" % len(ids), *ids))
            for layer in rows:
                arr = np.asarray(layer, dtype="<f4")
                assert arr.shape == (len(ids), dim)
                f.write(arr.tobytes())


def read_ted1(path):
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != b"TED1":
        raise ValueError("not a TED1 dump")
    pos = 4
    version, dim, layer_count = struct.unpack_from("<III", data, pos)
    pos += 12
    if version != 1:
        raise ValueError("unsupported version %d" % version)
    layers = list(struct.unpack_from("<%di" % layer_count, data, pos))
    pos += 4 * layer_count
    (count,) = struct.unpack_from("<I", data, pos)
    pos += 4
    sentences = []
    for _ in range(count):
        (n,) = struct.unpack_from("<I", data, pos)
        pos += 4
        text = data[pos:pos + n].decode("utf-8")
        pos += n
        (tokens,) = struct.unpack_from("<I", data, pos)
        pos += 4
        ids = list(struct.unpack_from("<%dI" % tokens, data, pos))
        pos += 4 * tokens
        rows = []
        for _ in layers:
            size = tokens * dim
            rows.append(np.frombuffer(data, "<f4", size, pos).reshape(tokens, dim))
            pos += 4 * size
        sentences.append((text, ids, rows))
    if pos != len(data):
        raise ValueError("trailing bytes")
    return dim, layers, sentences


def write_stt1(path, dim, entries):
    """entries: list of (id, count, vector), written in ascending id order."""
    with open(path, "wb") as f:
        f.write(b"STT1")
        f.write(struct.pack("<II", dim, len(entries)))
        for token_id, count, vec in sorted(entries, key=lambda e: e[0]):
            f.write(struct.pack("<IQ", token_id, count))
            f.write(np.asarray(vec, dtype="<f4").tobytes())
