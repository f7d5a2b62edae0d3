// Copyright 2026 The TENet-KWS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Builds a TENet12 with MTConv depthwise layers, fuses it, and classifies one
// synthetic clip with both models.

#include <iomanip>
#include <iostream>

#include "tenet/tenet.hpp"

int main() {
  using namespace tenet;
  const auto mtconv = build_model<float>("tenet12", DepthwiseKind::mtconv({3, 5, 7, 9}), 7);
  const auto fused = fuse_model(mtconv);

  const auto features = compute_mfcc(render_toy_template(3));
  const auto a = forward(mtconv, features);
  const auto b = forward(fused, features);

  float worst = 0.0f;
  for (std::size_t c = 0; c < a.logits.size(); ++c) worst = std::max(worst, std::abs(a.logits[c] - b.logits[c]));

  const auto before = count_report(mtconv.spec);
  const auto after = count_report(fused);
  std::cout << "parameters " << after.parameters << ", multiplies " << after.multiplies << " (T=98)\n"
            << "top-1 mtconv=" << class_name(a.top1()) << " fused=" << class_name(b.top1()) << '\n'
            << "max |logit diff| " << std::scientific << std::setprecision(2) << worst << '\n'
            << "count report unchanged by fusion: " << std::boolalpha << (before == after) << '\n';
  return 0;
}
