#pragma once

#include <json.hpp>

namespace betazero {

template <class State>
void writeTreeJsonLines(std::ostream& out, const SearchTree<State>& tree) {
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& n = tree.nodes[i];
    nlohmann::json j{{"kind", "node"},   {"id", i},           {"visits", n.visits},
                     {"value", n.value}, {"terminal", n.terminal}, {"edges", n.edges}};
    out << j.dump() << '\n';
  }
  for (std::size_t i = 0; i < tree.edges.size(); ++i) {
    const auto& e = tree.edges[i];
    nlohmann::json j{{"kind", "edge"},     {"id", i},          {"parent", e.parent},
                     {"action", e.action}, {"visits", e.visits}, {"q", e.q},
                     {"prior", e.prior},   {"reward", e.reward}, {"children", e.children}};
    out << j.dump() << '\n';
  }
}

}  // namespace betazero
