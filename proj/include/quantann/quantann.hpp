// Copyright 2026-present the quantann project
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


#pragma once

#include "quantann/bench.hpp"
#include "quantann/dataset.hpp"
#include "quantann/distance.hpp"
#include "quantann/error.hpp"
#include "quantann/exact_search.hpp"
#include "quantann/hnsw.hpp"
#include "quantann/quantizer.hpp"
#include "quantann/synthetic.hpp"
#include "quantann/vecs_io.hpp"
