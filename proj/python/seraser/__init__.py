# Copyright 2025 The seraser authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Test-time prompt tuning against background decision shortcuts."""

from seraser._core import (
    ToyWorld,
    __version__,
    argmax_index,
    augment_view,
    corner_patches,
    entropy,
    extract_background,
    extract_foreground,
    kl_divergence,
    kl_to_uniform,
    random_patches,
    shuffle_patches,
    softmax_from_similarities,
)

__all__ = [
    "ToyWorld",
    "argmax_index",
    "augment_view",
    "corner_patches",
    "entropy",
    "extract_background",
    "extract_foreground",
    "kl_divergence",
    "kl_to_uniform",
    "random_patches",
    "shuffle_patches",
    "softmax_from_similarities",
    "__version__",
]
