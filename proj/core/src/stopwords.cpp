// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 gatekeeper contributors

#include <algorithm>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "gatekeeper/analyzer.hpp"

namespace gatekeeper::analyzer {

// The classic 179-entry English stopword list, pinned here verbatim so the
// similarity analysis is reproducible. Contraction entries (e.g. "you're")
// never match the shared tokenization, which splits on the apostrophe; their
// fragments ("re", "ve", "ll", ...) are separate entries below.
const std::vector<std::string>& english_stopwords() {
    static const std::vector<std::string> words = {
        "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're",
        "you've", "you'll", "you'd", "your", "yours", "yourself", "yourselves", "he", "him", "his",
        "himself", "she", "she's", "her", "hers", "herself", "it", "it's", "its", "itself",
        "they", "them", "their", "theirs", "themselves", "what", "which", "who", "whom", "this",
        "that", "that'll", "these", "those", "am", "is", "are", "was", "were", "be",
        "been", "being", "have", "has", "had", "having", "do", "does", "did", "doing",
        "a", "an", "the", "and", "but", "if", "or", "because", "as", "until",
        "while", "of", "at", "by", "for", "with", "about", "against", "between", "into",
        "through", "during", "before", "after", "above", "below", "to", "from", "up", "down",
        "in", "out", "on", "off", "over", "under", "again", "further", "then", "once",
        "here", "there", "when", "where", "why", "how", "all", "any", "both", "each",
        "few", "more", "most", "other", "some", "such", "no", "nor", "not", "only",
        "own", "same", "so", "than", "too", "very", "s", "t", "can", "will",
        "just", "don", "don't", "should", "should've", "now", "d", "ll", "m", "o",
        "re", "ve", "y", "ain", "aren", "aren't", "couldn", "couldn't", "didn", "didn't",
        "doesn", "doesn't", "hadn", "hadn't", "hasn", "hasn't", "haven", "haven't", "isn", "isn't",
        "ma", "mightn", "mightn't", "mustn", "mustn't", "needn", "needn't", "shan", "shan't", "shouldn",
        "shouldn't", "wasn", "wasn't", "weren", "weren't", "won", "won't", "wouldn", "wouldn't",
    };
    return words;
}

bool is_stopword(std::string_view token) {
    static const std::unordered_set<std::string_view> lookup = [] {
        std::unordered_set<std::string_view> set;
        for (const auto& word : english_stopwords()) set.insert(word);
        return set;
    }();
    return lookup.count(token) > 0;
}

}  // namespace gatekeeper::analyzer
