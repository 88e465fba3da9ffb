// Copyright 2026 The xzmon Authors
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

#pragma once

// Umbrella header.

#include "bloch.hpp"
#include "config.hpp"
#include "emulator.hpp"
#include "experiments.hpp"
#include "filtering.hpp"
#include "integrators.hpp"
#include "io.hpp"
#include "leggett_garg.hpp"
#include "measurement.hpp"
#include "noise.hpp"
#include "statistics.hpp"
#include "version.hpp"
