#include "r3/model/matcher.hpp"

#include <stdexcept>

namespace r3::model {

ad::Var encode(ad::Graph& g, ad::Var x, const BiLstmVars& layer) {
  if (g.value(x).cols() == 0) throw std::invalid_argument("encode: empty sequence");
  const ad::Var fw = g.lstm(x, layer.fw_wx, layer.fw_wh, layer.fw_b, false);
  const ad::Var bw = g.lstm(x, layer.bw_wx, layer.bw_wh, layer.bw_b, true);
  return g.concat_rows({fw, bw});
}

ad::Var aggregate(ad::Graph& g, ad::Var m, const std::vector<BiLstmVars>& layers) {
  if (layers.empty()) throw std::invalid_argument("aggregate: need at least one layer");
  ad::Var h = m;
  for (const auto& layer : layers) h = encode(g, h, layer);
  return h;
}

ad::Var attend(ad::Graph& g, ad::Var hq, ad::Var hp, ad::Var wg, ad::Var bg) {
  const ad::Var projected = g.add_column(g.matmul(wg, hq), bg);  // l x Q
  const ad::Var scores = g.matmul(g.transpose(projected), hp);   // Q x P
  return g.softmax_cols(scores);
}

ad::Var match(ad::Graph& g, ad::Var hp, ad::Var hq, ad::Var attention, ad::Var wm) {
  const ad::Var aligned = g.matmul(hq, attention);  // l x P
  const ad::Var features = g.concat_rows({hp, aligned, g.mul(hp, aligned), g.sub(hp, aligned)});
  return g.relu(g.matmul(wm, features));
}

}  // namespace r3::model
