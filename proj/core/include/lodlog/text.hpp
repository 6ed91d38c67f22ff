#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace lodlog {

// Collapse runs of whitespace to single spaces and trim both ends.
std::string collapse_whitespace(std::string_view s);

std::string to_lower(std::string_view s);

std::string trim(std::string_view s);

// Split on a single-character delimiter; keeps empty fields.
std::vector<std::string> split(std::string_view s, char delim);

// Split on commas and trim each piece; drops empty pieces.
std::vector<std::string> split_list(std::string_view s);

bool starts_with_ci(std::string_view s, std::string_view prefix);
bool equals_ci(std::string_view a, std::string_view b);
bool contains_ci(std::string_view haystack, std::string_view needle);

// Local name of an IRI: the substring after the last '/' or '#'.
// Returns the whole string when no separator is present.
std::string local_name(std::string_view iri);

// Namespace of an IRI: everything up to and including the last '/' or '#'.
std::string namespace_of(std::string_view iri);

// Word tokenizer used by topic assignment and MD-pattern grouping.
// Splits on non-alphanumerics, lowercases, and additionally splits
// camelCase words; when a word splits, both the whole lowercased word
// and its segments are emitted ("InProceedings" -> {inproceedings, in,
// proceedings}).
std::set<std::string> tokenize_words(std::string_view s);

// Levenshtein edit distance.
std::size_t edit_distance(std::string_view a, std::string_view b);

// Jaccard index of two sets; 1.0 when both are empty (identical sets).
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

// FNV-1a 64-bit, used for stable content ids.
std::uint64_t fnv1a64(std::string_view s);
std::string to_hex(std::uint64_t v);

} // namespace lodlog
