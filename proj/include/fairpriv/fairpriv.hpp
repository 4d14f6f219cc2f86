// Copyright 2026 The fairpriv Authors
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

#include "fairpriv/analysis.hpp"
#include "fairpriv/data/csv.hpp"
#include "fairpriv/data/dataset.hpp"
#include "fairpriv/data/splits.hpp"
#include "fairpriv/data/synthetic.hpp"
#include "fairpriv/error.hpp"
#include "fairpriv/evaluation.hpp"
#include "fairpriv/learncore/adam.hpp"
#include "fairpriv/learncore/loss.hpp"
#include "fairpriv/learncore/matrix.hpp"
#include "fairpriv/learncore/mlp.hpp"
#include "fairpriv/learncore/tape.hpp"
#include "fairpriv/pipeline/config.hpp"
#include "fairpriv/pipeline/model_io.hpp"
#include "fairpriv/pipeline/report.hpp"
#include "fairpriv/pipeline/results.hpp"
#include "fairpriv/pipeline/sweep.hpp"
#include "fairpriv/training.hpp"
