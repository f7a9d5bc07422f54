#pragma once

#include <string>
#include <unordered_set>

namespace anselect {

using StopwordSet = std::unordered_set<std::string>;

// Fixed list of 121 common English function words. Pinned verbatim so that
// the unigram encoder and the word-overlap count features are reproducible.
inline const StopwordSet& builtin_stopwords() {
  static const StopwordSet words = {
      "a",       "about",   "above",   "after",   "again",   "against",
      "all",     "am",      "an",      "and",     "any",     "are",
      "as",      "at",      "be",      "because", "been",    "before",
      "being",   "below",   "between", "both",    "but",     "by",
      "can",     "cannot",  "could",   "did",     "do",      "does",
      "doing",   "down",    "during",  "each",    "few",     "for",
      "from",    "further", "had",     "has",     "have",    "having",
      "he",      "her",     "here",    "hers",    "him",     "his",
      "how",     "i",       "if",      "in",      "into",    "is",
      "it",      "its",     "itself",  "just",    "me",      "more",
      "most",    "my",      "myself",  "no",      "nor",     "not",
      "now",     "of",      "off",     "on",      "once",    "only",
      "or",      "other",   "our",     "ours",    "out",     "over",
      "own",     "same",    "she",     "should",  "so",      "some",
      "such",    "than",    "that",    "the",     "their",   "theirs",
      "them",    "then",    "there",   "these",   "they",    "this",
      "those",   "through", "to",      "too",     "under",   "until",
      "up",      "very",    "was",     "we",      "were",    "what",
      "when",    "where",   "which",   "while",   "who",     "whom",
      "why",     "will",    "with",    "would",   "you",     "your",
      "yours",
  };
  return words;
}

}  // namespace anselect
