#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace ragprobe {

/// Physical-proximity map for a US QWERTY layout, lowercase letters plus the
/// digits row. Symmetric by construction: b in neighbors(a) iff a in
/// neighbors(b).
class KeyboardAdjacency {
 public:
  KeyboardAdjacency();

  /// Neighbors of c (c lowercased first). Empty for unmapped characters.
  const std::vector<char>& neighbors(char c) const;

  bool has_neighbors(char c) const { return !neighbors(c).empty(); }

  const std::unordered_map<char, std::vector<char>>& map() const { return map_; }

 private:
  std::unordered_map<char, std::vector<char>> map_;
  std::vector<char> empty_;
};

const KeyboardAdjacency& qwerty_adjacency();

}  // namespace ragprobe
