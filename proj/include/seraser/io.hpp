/*
 * Copyright 2025 The seraser authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SERASER_IO_HPP_
#define SERASER_IO_HPP_

#include <filesystem>
#include <string>

#include "seraser/image.hpp"

namespace seraser {

// 8-bit PNG, gray for 1 channel and RGB for 3. Pixels are written as
// round(v * 255); reading divides by 255, so quantized images round-trip
// exactly. Output bytes are deterministic (fixed compression settings, no
// ancillary chunks).
void write_png(const std::filesystem::path& path, const Image& img);
Image read_png(const std::filesystem::path& path);

// Masks are single-channel PNGs, nonzero = foreground.
void write_mask_png(const std::filesystem::path& path,
                    const ForegroundMask& mask);
ForegroundMask read_mask_png(const std::filesystem::path& path);

// Whole-file helpers; writes go through a temp file + rename.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file_atomic(const std::filesystem::path& path,
                            const std::string& content);

}  // namespace seraser

#endif  // SERASER_IO_HPP_
