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

#include "mrl/sentiment.hpp"

#include <fmt/core.h>

#include "mrl/common.hpp"

namespace mrl {

namespace {

constexpr std::array<std::string_view, kNumSentiments> kSentimentNames = {
    "polarity", "anger", "disgust", "anticipation", "fear", "joy", "sadness", "surprise", "trust"};
constexpr std::array<std::string_view, kNumCategories> kCategoryNames = {
    "anger", "disgust", "anticipation", "fear", "joy", "sadness", "surprise", "trust", "positive", "negative"};

}  // namespace

std::string_view to_string(Sentiment s) { return kSentimentNames[index_of(s)]; }

Sentiment parse_sentiment(std::string_view name) {
  for (std::size_t i = 0; i < kNumSentiments; ++i) {
    if (kSentimentNames[i] == name) return kAllSentiments[i];
  }
  throw Error(ErrorCode::kParseError, fmt::format("unknown sentiment '{}'", name));
}

const std::vector<std::string>& label_space(Sentiment s) {
  static const std::vector<std::string> polarity = {"negative", "neutral", "positive"};
  static const std::vector<std::string> emotion = {"not_expressed", "expressed"};
  return s == Sentiment::kPolarity ? polarity : emotion;
}

int label_index(Sentiment s, std::string_view label) {
  const auto& space = label_space(s);
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (space[i] == label) return static_cast<int>(i);
  }
  throw Error(ErrorCode::kParseError, fmt::format("label '{}' is not valid for {}", label, to_string(s)));
}

std::string_view to_string(Category c) { return kCategoryNames[static_cast<std::size_t>(c)]; }

std::optional<Category> parse_category(std::string_view name) {
  for (std::size_t i = 0; i < kNumCategories; ++i) {
    if (kCategoryNames[i] == name) return static_cast<Category>(i);
  }
  return std::nullopt;
}

Category category_of(Sentiment emotion) {
  if (!is_emotion(emotion)) throw Error(ErrorCode::kInvalidArgument, "polarity has no single lexicon category");
  return static_cast<Category>(index_of(emotion) - 1);
}

}  // namespace mrl
