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

#ifndef MRL_SENTIMENT_HPP_
#define MRL_SENTIMENT_HPP_

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mrl {

// The nine annotated sentiments: document polarity and eight basic emotions.
enum class Sentiment { kPolarity, kAnger, kDisgust, kAnticipation, kFear, kJoy, kSadness, kSurprise, kTrust };

inline constexpr std::size_t kNumSentiments = 9;
inline constexpr std::array<Sentiment, kNumSentiments> kAllSentiments = {
    Sentiment::kPolarity, Sentiment::kAnger, Sentiment::kDisgust,  Sentiment::kAnticipation, Sentiment::kFear,
    Sentiment::kJoy,      Sentiment::kSadness, Sentiment::kSurprise, Sentiment::kTrust};

std::string_view to_string(Sentiment s);
Sentiment parse_sentiment(std::string_view name);
inline bool is_emotion(Sentiment s) { return s != Sentiment::kPolarity; }
inline std::size_t index_of(Sentiment s) { return static_cast<std::size_t>(s); }

// Coarse label spaces. Polarity: negative, neutral, positive. Emotions:
// not_expressed, expressed. Label indices follow this order.
const std::vector<std::string>& label_space(Sentiment s);
int label_index(Sentiment s, std::string_view label);

// Lexicon categories: the eight emotions followed by the two polarity values.
enum class Category { kAnger, kDisgust, kAnticipation, kFear, kJoy, kSadness, kSurprise, kTrust, kPositive, kNegative };
inline constexpr std::size_t kNumCategories = 10;

std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view name);
// Emotion sentiments map onto their lexicon category; polarity has none.
Category category_of(Sentiment emotion);

}  // namespace mrl

#endif  // MRL_SENTIMENT_HPP_
