#include "betazero/belief_mdp.hpp"

#include <iomanip>

namespace betazero {

void writeEpisodeCsv(std::ostream& out, const EpisodeRecord& record) {
  const auto old = out.precision(17);
  for (std::size_t t = 0; t < record.steps.size(); ++t) {
    const auto& step = record.steps[t];
    out << t;
    for (double x : step.representation) out << ',' << x;
    for (double p : step.policy) out << ',' << p;
    out << ',' << step.reward << ',' << record.returns[t] << '\n';
  }
  out.precision(old);
}

}  // namespace betazero
