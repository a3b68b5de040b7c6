#pragma once

// Shipped templates. cp_m4 and cm_m3 are stored as text; the rest are
// derived from them.

#include <string>
#include <vector>

#include "templates.hpp"

namespace axlab {

namespace detail {

inline const char* const kCpM4 = R"tpl(template cp_m4
m 4
mode par
budget 11
predicate cp_m4
weight 1 2 8
weight 1 3 -12
weight 1 4 0
weight 2 3 0
weight 2 4 12
weight 3 4 0

[node root]
on {1,2} goto n1
on {3} goto n2
on {4} goto n3

[edge n1]
flip 2 4>3>2>1

[node n1]
on {1} goto n4
on {2} goto n5
on {3,4} fail

[edge n2]
flip 1 1>2>3>4

[node n2]
on {3} goto n6
on {4} goto n7
on {1,2} fail

[edge n3]
flip 2 1>2>3>4
flip 3 1>3>2>4

[leaf n3]
condorcet 2

[edge n4]
flip 3 2>4>3>1

[leaf n4]
condorcet 3

[edge n5]
flip 5 4>3>1>2

[leaf n5]
condorcet 1

[edge n6]
flip 1 1>2>3>4

[node n6]
on {3} goto n8
on {4} goto n9
on {1,2} fail

[edge n7]
flip 1 1>2>3>4
flip 3 1>3>2>4

[leaf n7]
condorcet 2

[edge n8]
flip 1 3>4>2>1

[node n8]
on {1} goto n10
on {2} goto n11
on {3} goto n12
on {4} goto n13

[edge n9]
flip 3 1>3>2>4

[leaf n9]
condorcet 2

[edge n10]
flip 2 4>3>2>1
flip 2 4>2>3>1

[leaf n10]
condorcet 3

[edge n11]
flip 1 4>3>2>1

[node n11]
on {1} goto n14
on {2} goto n15
on {3,4} fail

[edge n12]
flip 1 3>4>2>1

[node n12]
on {1} goto n16
on {2} goto n17
on {3} goto n18
on {4} goto n19

[edge n13]
flip 1 1>2>3>4
flip 3 1>3>2>4

[leaf n13]
condorcet 2

[edge n14]
flip 1 4>3>2>1
flip 2 4>2>3>1

[leaf n14]
condorcet 3

[edge n15]
flip 1 4>3>2>1

[node n15]
on {1} goto n20
on {2} goto n21
on {3,4} fail

[edge n16]
flip 2 4>3>2>1
flip 3 4>2>3>1

[leaf n16]
condorcet 3

[edge n17]
flip 1 4>3>2>1

[node n17]
on {1} goto n22
on {2} goto n23
on {3,4} fail

[edge n18]
flip 1 1>2>3>4

[node n18]
on {3} goto n24
on {4} goto n25
on {1,2} fail

[edge n19]
flip 2 1>2>3>4
flip 3 1>3>2>4

[leaf n19]
condorcet 2

[edge n20]
flip 2 4>2>3>1

[leaf n20]
condorcet 3

[edge n21]
flip 1 4>3>2>1

[node n21]
on {1} goto n26
on {2} goto n27
on {3,4} fail

[edge n22]
flip 1 4>3>2>1
flip 3 4>2>3>1

[leaf n22]
condorcet 3

[edge n23]
flip 1 4>3>2>1

[node n23]
on {1} goto n28
on {2} goto n29
on {3,4} fail

[edge n24]
flip 1 1>2>3>4

[node n24]
on {3} goto n30
on {4} goto n31
on {1,2} fail

[edge n25]
flip 1 1>2>3>4
flip 3 1>3>2>4

[leaf n25]
condorcet 2

[edge n26]
flip 3 4>2>3>1

[leaf n26]
condorcet 3

[edge n27]
flip 5 4>3>1>2

[leaf n27]
condorcet 1

[edge n28]
flip 3 4>2>3>1

[leaf n28]
condorcet 3

[edge n29]
flip 5 4>3>1>2

[leaf n29]
condorcet 1

[edge n30]
flip 5 1>2>4>3

[leaf n30]
condorcet 4

[edge n31]
flip 3 1>3>2>4

[leaf n31]
condorcet 2
)tpl";

inline const char* const kCmM3 = R"tpl(template cm_m3
m 3
mode mm
budget 1
predicate cm_m3

[node root]
on {1} goto b1
on {2} goto b2
on {3} goto b3

[edge b1]
change 1 2>3>1 3>2>1

[leaf b1]
condorcet 3

[edge b2]
change 1 3>1>2 1>3>2

[leaf b2]
condorcet 1

[edge b3]
change 1 1>2>3 2>1>3

[leaf b3]
condorcet 2
)tpl";

inline std::string with_header(const std::string& text, const std::string& key, const std::string& value) {
  std::string t = "\n" + text;
  auto at = t.find("\n" + key + " ");
  auto end = t.find('\n', at + 1);
  return t.replace(at + 1, end - at - 1, key + " " + value).substr(1);
}

}  // namespace detail

// cp_m4 lifted to m alternatives: every ranking gets the suffix 5>...>m, the
// root sends a {5..m} winner down one extra flip, and inner nodes route
// {5..m} to their first child since the suffix margins keep those winners
// from ever arising there.
inline Template general_m_template(int m) {
  if (m < 5 || m > kMaxM) throw ArgumentError("general_m needs 5 <= m <= " + std::to_string(kMaxM));
  Template base = parse_template(detail::kCpM4);
  Template t = base;
  t.id = "general_m" + std::to_string(m);
  t.m = m;
  t.predicate.kind = "general_m";
  t.predicate.m = m;
  t.predicate.suffix_margin = 2 * t.budget + 2;
  std::vector<int> tail;
  for (int a = 5; a <= m; ++a) tail.push_back(a);
  auto lift = [&](const Ranking& r) {
    std::vector<int> o = r.order;
    o.insert(o.end(), tail.begin(), tail.end());
    return Ranking(o);
  };
  for (auto& nd : t.nodes) {
    for (auto& op : nd.ops) {
      op.from = lift(op.from);
      op.to = op.kind == OpKind::flip ? op.from.reversed() : lift(op.to);
    }
    if (nd.leaf()) continue;
    if (nd.id == "root") {
      nd.on.push_back({tail, "extra"});
      continue;
    }
    for (auto& c : nd.on)
      if (!c.target.empty()) {
        c.winners.insert(c.winners.end(), tail.begin(), tail.end());
        break;
      }
  }
  std::vector<int> id(m);
  for (int a = 0; a < m; ++a) id[a] = a + 1;
  Ranking ident(id);
  t.nodes.push_back({"extra", {{OpKind::flip, 7, ident, ident.reversed()}}, {}, 4});
  // round-trip through text so the result is validated like any loaded file
  return parse_template(save_template(t));
}

inline std::vector<std::string> builtin_template_names() {
  return {"cp_m4", "ch_m4", "cm_m3", "cs_m3", "general_m"};
}

// "general_m" alone means m=5; "general_m7" picks m.
inline Template builtin_template(const std::string& name) {
  if (name == "cp_m4") return parse_template(detail::kCpM4);
  if (name == "ch_m4") {
    auto t = parse_template(detail::with_header(detail::with_header(detail::kCpM4, "mode", "hm"), "template", "ch_m4"));
    return t;
  }
  if (name == "cm_m3") return parse_template(detail::kCmM3);
  if (name == "cs_m3")
    return parse_template(detail::with_header(detail::with_header(detail::kCmM3, "mode", "sp"), "template", "cs_m3"));
  if (name == "general_m") return general_m_template(5);
  if (name.rfind("general_m", 0) == 0) {
    long long m;
    if (detail::parse_int(name.substr(9), m) && m >= 5 && m <= kMaxM) return general_m_template(static_cast<int>(m));
  }
  throw NameError("unknown template '" + name + "'");
}

}  // namespace axlab
