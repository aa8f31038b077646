// Copyright 2026 The u8stream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "u8stream/byte_constraints.hpp"
#include "u8stream/byte_string.hpp"
#include "u8stream/error.hpp"
#include "u8stream/incremental_decoder.hpp"
#include "u8stream/token_model.hpp"
#include "u8stream/utf8.hpp"
#include "u8stream/vocab_analysis.hpp"
