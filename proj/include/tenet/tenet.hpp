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

// Umbrella header for the library (everything except the CLI).

#pragma once

#include "tenet/audio.hpp"
#include "tenet/container.hpp"
#include "tenet/dataset.hpp"
#include "tenet/error.hpp"
#include "tenet/fusion.hpp"
#include "tenet/model.hpp"
#include "tenet/random.hpp"
#include "tenet/tensor.hpp"
#include "tenet/tensor_grad.hpp"
#include "tenet/train.hpp"
