#pragma once

#include <vector>

#include "r3/autodiff/graph.hpp"

namespace r3::model {

/// Graph handles for one bidirectional LSTM layer.
struct BiLstmVars {
  ad::Var fw_wx, fw_wh, fw_b;
  ad::Var bw_wx, bw_wh, bw_b;
};

/// Bidirectional encoding of `x` (input_dim x T) into (2h x T): rows [0, h)
/// hold the forward state at t, rows [h, 2h) the backward state at t.
ad::Var encode(ad::Graph& g, ad::Var x, const BiLstmVars& layer);

/// Stack of bidirectional layers, each consuming the previous layer's output.
/// Throws std::invalid_argument for an empty stack.
ad::Var aggregate(ad::Graph& g, ad::Var m, const std::vector<BiLstmVars>& layers);

/// G = softmax_cols((Wg Hq + bg ⊗ e_Q)^T Hp), a Q x P matrix whose column i
/// is the attention over question words for passage word i.
ad::Var attend(ad::Graph& g, ad::Var hq, ad::Var hp, ad::Var wg, ad::Var bg);

/// M = relu(Wm [Hp; Hq G; Hp ⊙ Hq G; Hp - Hq G]), a 2l x P matrix.
ad::Var match(ad::Graph& g, ad::Var hp, ad::Var hq, ad::Var attention, ad::Var wm);

/// Shared matching features and the two aggregated views built on them.
struct MatchRepresentation {
  ad::Var m;
  ad::Var h_rank;
  ad::Var h_read;
  bool has_rank = false;
  bool has_read = false;
};

}  // namespace r3::model
