// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "soundtriage/cli.h"

int main(int argc, char** argv) { return soundtriage::run_cli(argc, argv, std::cout, std::cerr); }
