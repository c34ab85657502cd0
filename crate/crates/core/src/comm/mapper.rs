//! Master-to-slave communication schedules and consistency restoration.

use std::collections::HashMap;

use super::transport::{Comm, TraceEntry};
use crate::dof_manager::DofMap;
use crate::error::{Error, Result};
use crate::partition::{DofClass, DofClassification};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    /// Interface master to interface slave.
    Ims,
    /// Dependent(α) master to Halo(α) slave.
    DhAlpha,
    /// Dependent(β) master to Halo(β) slave.
    DhBeta,
}

impl Relation {
    pub const ALL: [Relation; 3] = [Relation::Ims, Relation::DhAlpha, Relation::DhBeta];

    fn index(self) -> usize {
        match self {
            Relation::Ims => 0,
            Relation::DhAlpha => 1,
            Relation::DhBeta => 2,
        }
    }

    /// Relation through which a slave of the given class receives its value.
    pub fn of_slave(class: DofClass) -> Option<Relation> {
        match class {
            DofClass::InterfaceSlave => Some(Relation::Ims),
            DofClass::HaloAlpha => Some(Relation::DhAlpha),
            DofClass::HaloBeta => Some(Relation::DhBeta),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Relation::Ims => "IMS",
            Relation::DhAlpha => "DHalpha",
            Relation::DhBeta => "DHbeta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConsistencyLevel {
    /// Masters correct, slaves undefined.
    L0,
    /// Masters and interface slaves correct.
    L1,
    /// Additionally Halo(α) correct.
    L2,
    /// Every known d.o.f. correct.
    L3,
}

impl ConsistencyLevel {
    /// Relation needed to raise a vector to this level from the one below.
    fn relation(self) -> Option<Relation> {
        match self {
            ConsistencyLevel::L0 => None,
            ConsistencyLevel::L1 => Some(Relation::Ims),
            ConsistencyLevel::L2 => Some(Relation::DhAlpha),
            ConsistencyLevel::L3 => Some(Relation::DhBeta),
        }
    }

    const ORDERED: [ConsistencyLevel; 4] = [
        ConsistencyLevel::L0,
        ConsistencyLevel::L1,
        ConsistencyLevel::L2,
        ConsistencyLevel::L3,
    ];
}

/// Send/receive layout of one relation, in `MPI_Alltoallv` form.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Schedule {
    pub send_counts: Vec<usize>,
    pub send_displ: Vec<usize>,
    pub sent_dof: Vec<usize>,
    pub recv_counts: Vec<usize>,
    pub recv_displ: Vec<usize>,
    pub rcvd_dof: Vec<usize>,
}

fn displacements(counts: &[usize]) -> Vec<usize> {
    counts
        .iter()
        .scan(0, |acc, &c| {
            let d = *acc;
            *acc += c;
            Some(d)
        })
        .collect()
}

impl Schedule {
    fn from_lists(sent: Vec<Vec<usize>>, rcvd: Vec<Vec<usize>>) -> Schedule {
        let send_counts: Vec<usize> = sent.iter().map(Vec::len).collect();
        let recv_counts: Vec<usize> = rcvd.iter().map(Vec::len).collect();
        Schedule {
            send_displ: displacements(&send_counts),
            recv_displ: displacements(&recv_counts),
            send_counts,
            recv_counts,
            sent_dof: sent.into_iter().flatten().collect(),
            rcvd_dof: rcvd.into_iter().flatten().collect(),
        }
    }

    pub fn n_sent(&self) -> usize {
        self.sent_dof.len()
    }

    pub fn n_received(&self) -> usize {
        self.rcvd_dof.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeMapper {
    rank: usize,
    n_ranks: usize,
    schedules: [Schedule; 3],
    /// 1 + number of interface slaves of each master, 0 for slaves.
    interface_multiplicity: Vec<usize>,
}

#[derive(Clone)]
struct Request {
    cell: usize,
    local: usize,
}

/// Builds the three relation schedules. Collective.
///
/// Every slave asks all ranks for its canonical key (smallest known
/// containing cell, local index). The rank holding the master recognizes
/// the key because every cell containing a master d.o.f. is known there.
pub fn build_fe_mapper(comm: &Comm, classification: &DofClassification, dof_map: &DofMap) -> Result<FeMapper> {
    let n_ranks = comm.size();
    let rank = comm.rank();
    let n = dof_map.n_dofs();
    if classification.n_dofs() != n {
        return Err(Error::DimensionMismatch(format!(
            "classification has {} d.o.f.s, map has {n}",
            classification.n_dofs()
        )));
    }

    let mut key_of: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut master_keys: HashMap<(usize, usize), usize> = HashMap::new();
    for (pos, &cell) in dof_map.cells().iter().enumerate() {
        for (local, &d) in dof_map.cell_dofs_at(pos).iter().enumerate() {
            if key_of[d].is_none() {
                key_of[d] = Some((cell, local));
            }
            if classification.class(d).is_master() {
                master_keys.insert((cell, local), d);
            }
        }
    }

    let slaves: Vec<usize> = (0..n).filter(|&d| classification.class(d).is_slave()).collect();
    let requests: Vec<Request> = slaves
        .iter()
        .map(|&d| {
            let (cell, local) = key_of[d].ok_or(Error::DofWithoutCell(d))?;
            Ok(Request { cell, local })
        })
        .collect::<Result<_>>()?;
    let outgoing = (0..n_ranks)
        .map(|r| if r == rank { Vec::new() } else { requests.clone() })
        .collect();
    let incoming = comm.all_to_all("mapper-requests", outgoing);

    // Master side: answer with the indices of matched requests; remember
    // which local master fills each slot.
    let mut replies: Vec<Vec<usize>> = vec![Vec::new(); n_ranks];
    let mut matched_masters: Vec<Vec<usize>> = vec![Vec::new(); n_ranks];
    for (src, reqs) in incoming.iter().enumerate() {
        for (idx, req) in reqs.iter().enumerate() {
            if let Some(&d) = master_keys.get(&(req.cell, req.local)) {
                replies[src].push(idx);
                matched_masters[src].push(d);
            }
        }
    }
    let answers = comm.all_to_all("mapper-replies", replies);

    // The master ranks need the relation of each matched slot; the slave
    // side knows it, so it sends one relation tag per matched request back.
    let mut hits = vec![0usize; slaves.len()];
    let mut rcvd: [Vec<Vec<usize>>; 3] = std::array::from_fn(|_| vec![Vec::new(); n_ranks]);
    let mut tags: Vec<Vec<u8>> = vec![Vec::new(); n_ranks];
    for (src, idxs) in answers.iter().enumerate() {
        for &idx in idxs {
            let d = slaves[idx];
            hits[idx] += 1;
            let rel = Relation::of_slave(classification.class(d)).expect("slave class");
            rcvd[rel.index()][src].push(d);
            tags[src].push(rel.index() as u8);
        }
    }
    if let Some(idx) = hits.iter().position(|&h| h != 1) {
        if hits[idx] == 0 {
            return Err(Error::UnmatchedSlave { rank, dof: slaves[idx] });
        }
        return Err(Error::InvalidInput(format!(
            "slave d.o.f. {} on rank {rank} matched by {} masters",
            slaves[idx], hits[idx]
        )));
    }
    let tags_back = comm.all_to_all("mapper-tags", tags);

    let mut sent: [Vec<Vec<usize>>; 3] = std::array::from_fn(|_| vec![Vec::new(); n_ranks]);
    for (dst, rel_tags) in tags_back.iter().enumerate() {
        assert_eq!(rel_tags.len(), matched_masters[dst].len());
        for (&t, &d) in rel_tags.iter().zip(&matched_masters[dst]) {
            sent[t as usize][dst].push(d);
        }
    }

    let mut interface_multiplicity: Vec<usize> =
        (0..n).map(|d| usize::from(classification.class(d).is_master())).collect();
    for lists in &sent[0] {
        for &d in lists {
            interface_multiplicity[d] += 1;
        }
    }

    let [s0, s1, s2] = sent;
    let [r0, r1, r2] = rcvd;
    Ok(FeMapper {
        rank,
        n_ranks,
        schedules: [
            Schedule::from_lists(s0, r0),
            Schedule::from_lists(s1, r1),
            Schedule::from_lists(s2, r2),
        ],
        interface_multiplicity,
    })
}

impl FeMapper {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn n_ranks(&self) -> usize {
        self.n_ranks
    }

    pub fn schedule(&self, relation: Relation) -> &Schedule {
        &self.schedules[relation.index()]
    }

    /// Number of ranks holding a copy of each master on the interface
    /// (the master itself included); 0 for slaves.
    pub fn interface_multiplicity(&self) -> &[usize] {
        &self.interface_multiplicity
    }

    /// Copies master values to the slaves of one relation. Collective.
    pub fn update(&self, comm: &Comm, values: &mut [f64], relation: Relation) {
        let s = self.schedule(relation);
        let send: Vec<f64> = s.sent_dof.iter().map(|&d| values[d]).collect();
        let mut recv = vec![0.0; s.rcvd_dof.len()];
        comm.record(TraceEntry {
            label: format!("update {}", relation.name()),
            send_counts: s.send_counts.clone(),
        });
        comm.all_to_all_v(&send, &s.send_counts, &s.send_displ, &mut recv, &s.recv_counts, &s.recv_displ);
        for (&d, v) in s.rcvd_dof.iter().zip(recv) {
            values[d] = v;
        }
    }

    /// Adds interface-slave values into their masters (reverse IMS).
    /// Contributions are added in source-rank order. Slave values are left
    /// as they were. Collective.
    pub fn accumulate_interface(&self, comm: &Comm, values: &mut [f64]) {
        let s = self.schedule(Relation::Ims);
        let send: Vec<f64> = s.rcvd_dof.iter().map(|&d| values[d]).collect();
        let mut recv = vec![0.0; s.sent_dof.len()];
        comm.record(TraceEntry {
            label: "accumulate IMS".to_string(),
            send_counts: s.recv_counts.clone(),
        });
        comm.all_to_all_v(&send, &s.recv_counts, &s.recv_displ, &mut recv, &s.send_counts, &s.send_displ);
        for (&d, v) in s.sent_dof.iter().zip(recv) {
            values[d] += v;
        }
    }

    /// Raises `values` from `current` to `target`, performing only the
    /// missing relation updates. Returns the new level. Collective.
    pub fn restore(
        &self,
        comm: &Comm,
        values: &mut [f64],
        current: ConsistencyLevel,
        target: ConsistencyLevel,
    ) -> ConsistencyLevel {
        for level in ConsistencyLevel::ORDERED {
            if level > current && level <= target {
                self.update(comm, values, level.relation().expect("level above L0"));
            }
        }
        current.max(target)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comm::Universe;
    use crate::dof_manager::build_dof_map;
    use crate::mapped_fe::ElementKind;
    use crate::mesh::build_rect_mesh;
    use crate::partition::{build_rank_cells, classify_dofs, CellOwnership};

    fn strip_setup(
        comm: &Comm,
        nx: usize,
        owners: Vec<usize>,
        kind: ElementKind,
    ) -> (DofClassification, DofMap, FeMapper) {
        let mesh = build_rect_mesh(0.0, nx as f64, 0.0, 1.0, nx, 1).unwrap();
        let own = CellOwnership::new(owners, comm.size()).unwrap();
        let rc = build_rank_cells(&mesh, &own, comm.rank()).unwrap();
        let map = build_dof_map(&mesh, &rc.known(), kind).unwrap();
        let cls = classify_dofs(&rc, &map, &own).unwrap();
        let fm = build_fe_mapper(comm, &cls, &map).unwrap();
        (cls, map, fm)
    }

    #[test]
    fn displacements_are_prefix_sums() {
        assert_eq!(displacements(&[2, 0, 3, 1]), vec![0, 2, 2, 5]);
        assert!(displacements(&[]).is_empty());
    }

    #[test]
    fn single_rank_has_empty_schedules() {
        let out = Universe::new(1).run(|c| strip_setup(&c, 3, vec![0; 3], ElementKind::Q1).2);
        for rel in Relation::ALL {
            let s = out[0].schedule(rel);
            assert_eq!(s.send_counts, vec![0]);
            assert_eq!(s.recv_counts, vec![0]);
        }
    }

    #[test]
    fn strip_three_ranks_middle_sends_both_ways() {
        // cells 0..5 in a row, two per rank
        let out = Universe::new(3).run(|c| {
            let (cls, _, fm) = strip_setup(&c, 6, vec![0, 0, 1, 1, 2, 2], ElementKind::Q1);
            (cls.count(DofClass::InterfaceSlave), fm)
        });
        let (_, mid) = &out[1];
        let ims = mid.schedule(Relation::Ims);
        // rank 1 is master of the 2 d.o.f.s on its right interface, slave on its left
        assert_eq!(ims.send_counts, vec![0, 0, 2]);
        assert_eq!(ims.recv_counts, vec![2, 0, 0]);
        assert!(ims.send_displ.windows(2).all(|w| w[0] <= w[1]));
        for (n_slaves, fm) in &out {
            assert_eq!(fm.schedule(Relation::Ims).n_received(), *n_slaves);
        }
        // halo d.o.f.s of the middle rank come from both neighbours
        let dh: usize = [Relation::DhAlpha, Relation::DhBeta]
            .iter()
            .map(|&r| mid.schedule(r).n_received())
            .sum();
        assert_eq!(dh, 4);
    }

    #[test]
    fn restore_skips_implied_updates() {
        Universe::new(2).run(|c| {
            let (_, map, fm) = strip_setup(&c, 4, vec![0, 0, 1, 1], ElementKind::Q2);
            let mut v = vec![1.0; map.n_dofs()];
            c.clear_trace();
            let lvl = fm.restore(&c, &mut v, ConsistencyLevel::L3, ConsistencyLevel::L1);
            assert_eq!(lvl, ConsistencyLevel::L3);
            assert!(c.trace().is_empty());
            let lvl = fm.restore(&c, &mut v, ConsistencyLevel::L0, ConsistencyLevel::L2);
            assert_eq!(lvl, ConsistencyLevel::L2);
            let labels: Vec<String> = c.trace().into_iter().map(|t| t.label).collect();
            assert_eq!(labels, vec!["update IMS", "update DHalpha"]);
        });
    }

    #[test]
    fn accumulate_adds_slave_copies_into_masters() {
        let out = Universe::new(2).run(|c| {
            let (cls, map, fm) = strip_setup(&c, 2, vec![0, 1], ElementKind::Q1);
            let mut v = vec![0.0; map.n_dofs()];
            for d in 0..v.len() {
                if cls.class(d).is_interface() {
                    v[d] = 1.0 + c.rank() as f64;
                }
            }
            fm.accumulate_interface(&c, &mut v);
            (cls, v, fm.interface_multiplicity().to_vec())
        });
        let (cls0, v0, m0) = &out[0];
        for d in 0..v0.len() {
            if cls0.class(d) == DofClass::InterfaceMaster {
                assert_eq!(v0[d], 3.0);
                assert_eq!(m0[d], 2);
            }
        }
    }
}
