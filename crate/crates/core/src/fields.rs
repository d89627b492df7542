use core::fmt;

/// One of the four unknowns of the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    /// Tumor cells.
    U,
    /// Active extracellular matrix (the chemoattractant).
    V,
    /// Extracellular matrix.
    W,
    /// Matrix-degrading enzymes.
    Z,
}

impl Field {
    pub const ALL: [Field; 4] = [Field::U, Field::V, Field::W, Field::Z];

    pub fn name(self) -> &'static str {
        match self {
            Field::U => "u",
            Field::V => "v",
            Field::W => "w",
            Field::Z => "z",
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One value per field, in `u, v, w, z` order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PerField<T> {
    pub u: T,
    pub v: T,
    pub w: T,
    pub z: T,
}

impl<T> PerField<T> {
    pub fn new(u: T, v: T, w: T, z: T) -> Self {
        Self { u, v, w, z }
    }

    pub fn from_fn(mut f: impl FnMut(Field) -> T) -> Self {
        Self {
            u: f(Field::U),
            v: f(Field::V),
            w: f(Field::W),
            z: f(Field::Z),
        }
    }

    pub fn get(&self, field: Field) -> &T {
        match field {
            Field::U => &self.u,
            Field::V => &self.v,
            Field::W => &self.w,
            Field::Z => &self.z,
        }
    }

    pub fn get_mut(&mut self, field: Field) -> &mut T {
        match field {
            Field::U => &mut self.u,
            Field::V => &mut self.v,
            Field::W => &mut self.w,
            Field::Z => &mut self.z,
        }
    }

    pub fn map<S>(&self, mut f: impl FnMut(&T) -> S) -> PerField<S> {
        PerField {
            u: f(&self.u),
            v: f(&self.v),
            w: f(&self.w),
            z: f(&self.z),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Field, &T)> {
        Field::ALL.into_iter().map(move |field| (field, self.get(field)))
    }
}
