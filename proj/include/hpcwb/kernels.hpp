#pragma once

#include "hpcwb/kernels/backend.hpp"
#include "hpcwb/kernels/csr.hpp"
#include "hpcwb/kernels/data.hpp"
#include "hpcwb/kernels/oracle.hpp"
#include "hpcwb/kernels/registry.hpp"
#include "hpcwb/kernels/run.hpp"
#include "hpcwb/kernels/spec.hpp"
