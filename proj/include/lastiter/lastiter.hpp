// Copyright 2026 The lastiter Authors
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

#ifndef LASTITER_LASTITER_HPP_
#define LASTITER_LASTITER_HPP_

#include "lastiter/core.hpp"
#include "lastiter/problem.hpp"
#include "lastiter/metrics.hpp"
#include "lastiter/solvers.hpp"
#include "lastiter/scli.hpp"
#include "lastiter/theory_checks.hpp"
#include "lastiter/harness.hpp"
#include "lastiter/io.hpp"

#endif  // LASTITER_LASTITER_HPP_
