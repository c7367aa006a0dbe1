/*
 * Copyright 2026 The mrl-workbench Authors.
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

#ifndef MRL_UTF8_HPP_
#define MRL_UTF8_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace mrl::utf8 {

// Decodes UTF-8; malformed bytes decode to U+FFFD.
std::u32string decode(std::string_view text);
std::string encode(char32_t cp);
std::string encode(std::u32string_view cps);

// Splits into one string per code point.
std::vector<std::string> chars(std::string_view text);
std::size_t length(std::string_view text);

bool is_space(char32_t cp);
// Punctuation and symbols that never make a token count as a word.
bool is_punctuation(char32_t cp);

// Maximal runs of non-whitespace.
std::vector<std::string_view> split_words(std::string_view text);

// True when the run carries at least one non-punctuation code point.
bool is_word(std::string_view token);

// Strips leading and trailing punctuation code points.
std::string_view trim_punctuation(std::string_view token);

}  // namespace mrl::utf8

#endif  // MRL_UTF8_HPP_
