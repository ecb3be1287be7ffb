// Copyright 2026 The supplychain Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Umbrella header.

#pragma once

#include "supplychain/config.hpp"
#include "supplychain/engine.hpp"
#include "supplychain/env_handle.hpp"
#include "supplychain/episode.hpp"
#include "supplychain/error.hpp"
#include "supplychain/layout.hpp"
#include "supplychain/learner.hpp"
#include "supplychain/metrics.hpp"
#include "supplychain/navigation.hpp"
#include "supplychain/network.hpp"
#include "supplychain/parallel.hpp"
#include "supplychain/policies.hpp"
#include "supplychain/replay.hpp"
#include "supplychain/rng.hpp"
#include "supplychain/scenario.hpp"
#include "supplychain/topology.hpp"
