// Copyright 2026 the rdc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RDC_IMAGE_IO_HPP_
#define RDC_IMAGE_IO_HPP_

#include <string>

#include "rdc/tensor.hpp"

namespace rdc {

// Images are float (3,H,W) tensors in [0,1]. Files are 8-bit RGB; PNG and
// binary PPM (P6) are supported, chosen by extension.
TensorF load_image(const std::string& path);
void save_image(const std::string& path, const TensorF& img);

// Quantizes to 8-bit the same way save_image does; used where metrics must
// see exactly what a viewer of the written file would see.
TensorF quantize_8bit(const TensorF& img);

}  // namespace rdc

#endif  // RDC_IMAGE_IO_HPP_
