# Copyright 2026 The anpr Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Number plate recognition toolkit (C++ core)."""

import numpy as np
import pytest

import anpr


def test_image_ops():
    rgb = np.zeros((4, 6, 3), np.uint8)
    rgb[..., 0] = 255
    gray = anpr.to_grayscale(rgb)
    assert gray.shape == (4, 6)
    assert int(gray[0, 0]) == 76

    step = np.zeros((16, 16), np.uint8)
    step[:, 8:] = 255
    edges = anpr.canny(step)
    assert edges.dtype == np.bool_
    assert edges[:, 7].all() and edges.sum() == 16

    t, binary = anpr.otsu_threshold(step)
    assert t == 1
    assert binary[:, :8].all() and not binary[:, 8:].any()

    assert anpr.resize_bilinear(np.array([[0, 255]], np.uint8), 4, 1).tolist() == [[0, 64, 191, 255]]
    assert anpr.bilateral_filter(np.full((5, 5), 9, np.uint8)).tolist() == np.full((5, 5), 9).tolist()


def test_components():
    img = np.zeros((4, 4), np.uint8)
    img[1, 1] = img[2, 2] = 1
    assert len(anpr.label_components(img, 8)) == 1
    assert len(anpr.label_components(img, 4)) == 2
    assert anpr.label_components(img)[0]["area"] == 2


def test_errors_map_to_python():
    with pytest.raises(anpr.AnprError):
        anpr.bilateral_filter(np.zeros((4, 4), np.uint8), diameter=4)
    with pytest.raises(anpr.AnprError):
        anpr.render_glyph("@")
    with pytest.raises(RuntimeError):
        anpr.character_accuracy("A", "")


def test_metric_and_report():
    assert anpr.character_accuracy("73H12AF5032", "MH12AF5032") == pytest.approx(0.9)
    assert anpr.character_accuracy("DL3CBD5092", "DL3CBD5092") == 1.0
    rep = anpr.evaluate_batch([("a", "AB", "AB", 0.2), ("b", "A", "AB", 0.4)])
    assert rep["mean_accuracy"] == 0.75
    assert "Character accuracy" in rep["table"]


def test_nms_and_cfg():
    kept = anpr.nms([(0.5, 0.5, 0.2, 0.2, 0.9, 0), (0.5, 0.5, 0.2, 0.2, 0.8, 0)])
    assert len(kept) == 1 and kept[0][4] == pytest.approx(0.9)
    spec = anpr.parse_cfg("[net]\nwidth=8\nheight=8\nchannels=3\n[convolutional]\nfilters=2\nsize=1\n")
    assert spec["layers"] == 1 and spec["channels"] == 3


def test_settings_defaults():
    s = anpr.default_settings()
    assert s["bilateral"] == "9,70,70"
    assert s["blob_min_size"] == "50"


def test_generation_is_deterministic():
    a, la = anpr.generate_dataset(per_class=1, seed=3)
    b, lb = anpr.generate_dataset(per_class=1, seed=3)
    assert a.shape == (36, 32, 32)
    assert np.array_equal(a, b) and la.tolist() == list(range(36))
    plate, boxes = anpr.compose_plate("MH12AB1234")
    assert len(boxes) == 10
    assert plate.shape[1] >= 4 * plate.shape[0]


def test_train_save_and_recognize(tmp_path):
    images, labels = anpr.generate_dataset(per_class=1, seed=5)
    model, log = anpr.train(images, labels, epochs=3, batch_size=8, seed=2)
    assert len(log) == 3 and log[0][0] == 1
    again, _ = anpr.train(images, labels, epochs=3, batch_size=8, seed=2)
    assert model == again

    path = tmp_path / "m.bin"
    model.save(str(path))
    loaded = anpr.CharModel.load(str(path))
    assert loaded.parameter_count == model.parameter_count
    label, probs = loaded.predict(images[0])
    assert label in anpr.ALPHABET and probs.sum() == pytest.approx(1.0)

    plate, _ = anpr.compose_plate("AB12")
    r = anpr.recognize_plate(plate, loaded)
    assert len(r["text"]) == len(r["boxes"])
    blank = anpr.recognize_plate(np.full((50, 200), 220, np.uint8), loaded)
    assert blank["unread"] and blank["text"] == ""
    assert anpr.preprocess_plate(plate, {"binarization": "adaptive"}).shape == plate.shape
