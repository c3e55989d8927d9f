// Copyright 2026 The kgtwig Authors.
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

#ifndef KGTWIG_KGTWIG_HPP_
#define KGTWIG_KGTWIG_HPP_

#include "kgtwig/adam.hpp"
#include "kgtwig/complex_model.hpp"
#include "kgtwig/experiment.hpp"
#include "kgtwig/graph_features.hpp"
#include "kgtwig/grid.hpp"
#include "kgtwig/hyperparams.hpp"
#include "kgtwig/kg_store.hpp"
#include "kgtwig/kge_loss.hpp"
#include "kgtwig/kge_trainer.hpp"
#include "kgtwig/lp_eval.hpp"
#include "kgtwig/metrics.hpp"
#include "kgtwig/negative_sampler.hpp"
#include "kgtwig/run_config.hpp"
#include "kgtwig/split.hpp"
#include "kgtwig/sweep.hpp"
#include "kgtwig/twig_net.hpp"
#include "kgtwig/twig_train.hpp"
#include "kgtwig/util.hpp"

#endif  // KGTWIG_KGTWIG_HPP_
