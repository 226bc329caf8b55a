use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};

/// A named, row-major block of the flat parameter array.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub name: String,
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

/// Maps flat parameter indices to structured fields.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    segments: Vec<Segment>,
}

impl Layout {
    /// Segments are packed contiguously in the order given.
    pub fn new(blocks: &[(&str, usize, usize)]) -> Self {
        let mut offset = 0;
        let segments = blocks
            .iter()
            .map(|&(name, rows, cols)| {
                let seg = Segment { name: name.to_string(), offset, rows, cols };
                offset += rows * cols;
                seg
            })
            .collect();
        Self { segments }
    }

    pub fn len(&self) -> usize {
        self.segments.last().map_or(0, |s| s.offset + s.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment(&self, name: &str) -> Option<&Segment> {
        self.segments.iter().find(|s| s.name == name)
    }
}

/// Flat complex parameter set of an ansatz together with its layout.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterVector {
    values: Vec<C64>,
    layout: Layout,
}

impl ParameterVector {
    pub fn new(layout: Layout, values: Vec<C64>) -> Result<Self> {
        if values.len() != layout.len() {
            return config_err(format!(
                "parameter count {} does not match layout size {}",
                values.len(),
                layout.len()
            ));
        }
        Ok(Self { values, layout })
    }

    pub fn zeros(layout: Layout) -> Self {
        let values = vec![C64::new(0.0, 0.0); layout.len()];
        Self { values, layout }
    }

    /// Assemble from one slice per segment, in layout order.
    pub fn from_parts(layout: Layout, parts: &[&[C64]]) -> Result<Self> {
        if parts.len() != layout.segments().len() {
            return config_err(format!(
                "expected {} parameter blocks, got {}",
                layout.segments().len(),
                parts.len()
            ));
        }
        let mut values = Vec::with_capacity(layout.len());
        for (seg, part) in layout.segments().iter().zip(parts) {
            if part.len() != seg.len() {
                return config_err(format!(
                    "block `{}` expects {} values, got {}",
                    seg.name,
                    seg.len(),
                    part.len()
                ));
            }
            values.extend_from_slice(part);
        }
        Self::new(layout, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// Panics if `name` is not a segment of the layout.
    pub fn view(&self, name: &str) -> &[C64] {
        let seg = self.layout.segment(name).unwrap_or_else(|| panic!("no segment `{name}`"));
        &self.values[seg.range()]
    }

    pub fn view_mut(&mut self, name: &str) -> &mut [C64] {
        let range = self.layout.segment(name).unwrap_or_else(|| panic!("no segment `{name}`")).range();
        &mut self.values[range]
    }

    /// Split back into one owned vector per segment.
    pub fn to_parts(&self) -> Vec<Vec<C64>> {
        self.layout.segments().iter().map(|s| self.values[s.range()].to_vec()).collect()
    }

    pub fn set_values(&mut self, values: &[C64]) -> Result<()> {
        if values.len() != self.values.len() {
            return config_err(format!(
                "parameter count {} does not match {}",
                values.len(),
                self.values.len()
            ));
        }
        self.values.copy_from_slice(values);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layout_offsets_are_contiguous() {
        let layout = Layout::new(&[("a", 1, 3), ("b", 1, 2), ("W", 2, 3)]);
        assert_eq!(layout.len(), 11);
        assert_eq!(layout.segment("W").unwrap().offset, 5);
        assert!(layout.segment("c").is_none());
    }

    #[test]
    fn wrong_block_size_is_rejected() {
        let layout = Layout::new(&[("a", 1, 2)]);
        let one = [C64::new(1.0, 0.0)];
        assert!(ParameterVector::from_parts(layout, &[&one]).is_err());
    }

    proptest! {
        #[test]
        fn structured_flat_round_trip(
            n in 1usize..6,
            m in 1usize..6,
            seed in proptest::collection::vec(-5.0f64..5.0, 2 * 6 * 8),
        ) {
            let layout = Layout::new(&[("a", 1, n), ("b", 1, m), ("W", m, n)]);
            let flat: Vec<C64> = (0..layout.len())
                .map(|i| C64::new(seed[2 * i], seed[2 * i + 1]))
                .collect();
            let pv = ParameterVector::new(layout.clone(), flat.clone()).unwrap();
            let parts = pv.to_parts();
            let refs: Vec<&[C64]> = parts.iter().map(|p| p.as_slice()).collect();
            let back = ParameterVector::from_parts(layout, &refs).unwrap();
            prop_assert_eq!(back.values(), flat.as_slice());
            prop_assert_eq!(pv.view("W").len(), n * m);
        }
    }
}
