#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "chartparse/treebank.hpp"

namespace chartparse {

using LabelId = int;
inline constexpr LabelId kEmptyLabelId = 0;

/// Dense string <-> id table; ids follow insertion order.
class Index {
 public:
  int add(const std::string& item);
  int find(const std::string& item) const;
  int id_or(const std::string& item, int fallback) const {
    const int id = find(item);
    return id < 0 ? fallback : id;
  }
  const std::string& at(int id) const { return items_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& items() const { return items_; }
  int size() const { return static_cast<int>(items_.size()); }

 private:
  std::vector<std::string> items_;
  std::unordered_map<std::string, int> ids_;
};

inline const std::string kUnkToken = "<UNK>";
inline const std::string kStartToken = "<START>";
inline const std::string kStopToken = "<STOP>";

/// Word, character, tag and label tables. Words, characters and tags reserve
/// ids 0/1/2 for UNK/START/STOP; labels reserve id 0 for the empty label.
struct Vocab {
  static constexpr int kUnk = 0;
  static constexpr int kStart = 1;
  static constexpr int kStop = 2;

  Index words;
  std::vector<int> word_counts;  // parallel to words; specials have count 0
  Index chars;
  Index tags;
  Index labels;

  static Vocab empty();
  static Vocab build(const std::vector<Tree>& corpus);

  int word_id(const std::string& word) const { return words.id_or(word, kUnk); }
  int tag_id(const std::string& tag) const { return tags.id_or(tag, kUnk); }
  int count(int word_id) const { return word_counts.at(static_cast<std::size_t>(word_id)); }
  std::vector<int> char_ids(const std::string& word) const;
  LabelId label_id(const std::string& label) const { return labels.find(label); }
};

/// Splits UTF-8 text into code points; malformed bytes become single-byte units.
std::vector<std::string> utf8_chars(const std::string& text);

}  // namespace chartparse
