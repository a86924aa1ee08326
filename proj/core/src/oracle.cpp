#include "stabrace/oracle.hpp"

#include "stabrace/abstraction.hpp"

namespace stabrace {

std::vector<OracleCheck> oracle_check(const Program& p, const std::vector<MethodName>& methods,
                                      const std::vector<unsigned>& unrolls,
                                      const AnalysisOptions& opts, EnumBounds bounds) {
  const Analyzer analyzer(p, opts);
  const Config init = universal_config(p.fields());
  bounds.lock_cap = opts.lock_cap;

  std::vector<OracleCheck> out;
  for (const MethodName& m : methods) {
    const Block& body = p.method(m).body;
    const AbstractState analyzed = analyzer.analyze_compound(body, AbstractState::bottom());
    for (unsigned u : unrolls) {
      bounds.loop_unroll = u;
      TraceEnumerator en(p, bounds);
      AlphaAccumulator acc(opts.lock_cap);
      en.for_each(body, init, [&](const Trace& t, const Config&) {
        acc.add(t.commands);
        return true;
      });
      out.push_back(OracleCheck{m, u, analyzed, acc.result(), acc.count()});
    }
  }
  return out;
}

}  // namespace stabrace
