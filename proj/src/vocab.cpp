#include "chartparse/vocab.hpp"

namespace chartparse {

int Index::add(const std::string& item) {
  auto it = ids_.find(item);
  if (it != ids_.end()) return it->second;
  const int id = static_cast<int>(items_.size());
  items_.push_back(item);
  ids_.emplace(item, id);
  return id;
}

int Index::find(const std::string& item) const {
  auto it = ids_.find(item);
  return it == ids_.end() ? -1 : it->second;
}

Vocab Vocab::empty() {
  Vocab v;
  for (Index* index : {&v.words, &v.chars, &v.tags}) {
    index->add(kUnkToken);
    index->add(kStartToken);
    index->add(kStopToken);
  }
  v.word_counts.assign(3, 0);
  v.labels.add(kEmptyLabel);
  return v;
}

Vocab Vocab::build(const std::vector<Tree>& corpus) {
  Vocab v = empty();
  for (const Tree& tree : corpus) {
    for (const Leaf& leaf : leaves_of(tree)) {
      const int id = v.words.add(leaf.word);
      if (static_cast<std::size_t>(id) >= v.word_counts.size()) v.word_counts.push_back(0);
      ++v.word_counts[static_cast<std::size_t>(id)];
      v.tags.add(leaf.tag);
      for (const auto& c : utf8_chars(leaf.word)) v.chars.add(c);
    }
    for (const auto& [span, label] : gold_index(tree).spans) v.labels.add(label);
  }
  return v;
}

std::vector<int> Vocab::char_ids(const std::string& word) const {
  std::vector<int> out;
  for (const auto& c : utf8_chars(word)) out.push_back(chars.id_or(c, kUnk));
  return out;
}

std::vector<std::string> utf8_chars(const std::string& text) {
  std::vector<std::string> out;
  std::size_t k = 0;
  while (k < text.size()) {
    const auto lead = static_cast<unsigned char>(text[k]);
    std::size_t len = 1;
    if ((lead & 0xE0) == 0xC0) len = 2;
    else if ((lead & 0xF0) == 0xE0) len = 3;
    else if ((lead & 0xF8) == 0xF0) len = 4;
    if (k + len > text.size()) len = 1;
    for (std::size_t t = 1; t < len; ++t) {
      if ((static_cast<unsigned char>(text[k + t]) & 0xC0) != 0x80) {
        len = 1;
        break;
      }
    }
    out.push_back(text.substr(k, len));
    k += len;
  }
  return out;
}

}  // namespace chartparse
