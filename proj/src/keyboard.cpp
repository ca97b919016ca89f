#include "ragprobe/keyboard.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <utility>

#include "ragprobe/error.hpp"

namespace ragprobe {

namespace {

// Base proximity lists for the letter block plus the digit row above it.
// Letters follow the common attack-library convention (same row plus the
// staggered diagonals); digits reach their row neighbors and the letters
// diagonally below. The constructor symmetrizes, so listing a pair once in
// either direction is enough.
const std::pair<char, const char*> kBaseLayout[] = {
    {'q', "was12"},   {'w', "qeasd23"}, {'e', "wsdfr34"}, {'r', "edfgt45"},
    {'t', "rfghy56"}, {'y', "tghju67"}, {'u', "yhjki78"}, {'i', "ujklo89"},
    {'o', "iklp90"},  {'p', "ol0"},     {'a', "qwsxz"},   {'s', "qweadzx"},
    {'d', "wersfxc"}, {'f', "ertdgcv"}, {'g', "rtyfhvb"}, {'h', "tyugjbn"},
    {'j', "yuihknm"}, {'k', "uiojlm"},  {'l', "iopk"},    {'z', "asx"},
    {'x', "zsdc"},    {'c', "xdfv"},    {'v', "cfgb"},    {'b', "vghn"},
    {'n', "bhjm"},    {'m', "njk"},     {'1', "2"},       {'2', "13"},
    {'3', "24"},      {'4', "35"},      {'5', "46"},      {'6', "57"},
    {'7', "68"},      {'8', "79"},      {'9', "80"},
};

}  // namespace

KeyboardAdjacency::KeyboardAdjacency() {
  std::unordered_map<char, std::set<char>> sets;
  for (const auto& [key, row] : kBaseLayout) {
    for (const char* p = row; *p; ++p) {
      sets[key].insert(*p);
      sets[*p].insert(key);
    }
  }
  for (auto& [key, neighbors] : sets) {
    map_[key] = std::vector<char>(neighbors.begin(), neighbors.end());
  }
  for (char c = 'a'; c <= 'z'; ++c) {
    if (!has_neighbors(c)) raise(Errc::invariant, std::string("letter without neighbors: ") + c);
  }
}

const std::vector<char>& KeyboardAdjacency::neighbors(char c) const {
  char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  auto it = map_.find(lower);
  return it == map_.end() ? empty_ : it->second;
}

const KeyboardAdjacency& qwerty_adjacency() {
  static const KeyboardAdjacency instance;
  return instance;
}

}  // namespace ragprobe
