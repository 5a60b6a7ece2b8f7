//! Native transliterations of the sorting routines in `assets/algorithms`.
//!
//! Each function follows its Python source line by line, including the odd
//! parts (index arithmetic through `i64`, the explicit stack of the iterative
//! quicksort, list rebuilding in the recursive timsort). Python exceptions
//! surface as [`OracleError::Raised`].

use super::OracleError;

type Res = Result<Vec<i64>, OracleError>;

fn at(v: &[i64], i: i64) -> Result<i64, OracleError> {
    // Python allows negative indices; none of the sorting sources rely on them.
    usize::try_from(i)
        .ok()
        .and_then(|i| v.get(i).copied())
        .ok_or_else(|| OracleError::Raised(format!("IndexError: list index {i} out of range")))
}

fn swap(v: &mut [i64], a: i64, b: i64) -> Result<(), OracleError> {
    at(v, a)?;
    at(v, b)?;
    v.swap(a as usize, b as usize);
    Ok(())
}

fn set(v: &mut [i64], i: i64, x: i64) -> Result<(), OracleError> {
    at(v, i)?;
    v[i as usize] = x;
    Ok(())
}

/// `main(array, size, start=0)`; printed under both "Insertion Sort" and
/// "Selection Sort" in the recursive listing.
pub fn recursive_min_selection(mut array: Vec<i64>) -> Res {
    fn go(array: &mut Vec<i64>, start: i64) -> Result<(), OracleError> {
        if start >= array.len() as i64 - 1 {
            return Ok(());
        }
        let mut min_index = start;
        for j in start + 1..array.len() as i64 {
            if at(array, j)? < at(array, min_index)? {
                min_index = j;
            }
        }
        swap(array, start, min_index)?;
        go(array, start + 1)
    }
    go(&mut array, 0)?;
    Ok(array)
}

pub fn recursive_bubble(mut list_data: Vec<i64>) -> Res {
    fn go(list_data: &mut Vec<i64>, length: i64) -> Result<(), OracleError> {
        for i in 0..(length - 1).max(0) {
            if at(list_data, i)? > at(list_data, i + 1)? {
                swap(list_data, i, i + 1)?;
            }
        }
        if length < 2 {
            Ok(())
        } else {
            go(list_data, length - 1)
        }
    }
    let n = list_data.len() as i64;
    go(&mut list_data, n)?;
    Ok(list_data)
}

pub fn recursive_adaptive_bubble(mut list_data: Vec<i64>) -> Res {
    fn go(list_data: &mut Vec<i64>, length: i64) -> Result<(), OracleError> {
        let mut swapped = false;
        for i in 0..(length - 1).max(0) {
            if at(list_data, i)? > at(list_data, i + 1)? {
                swap(list_data, i, i + 1)?;
                swapped = true;
            }
        }
        if !swapped {
            Ok(())
        } else {
            go(list_data, length - 1)
        }
    }
    let n = list_data.len() as i64;
    go(&mut list_data, n)?;
    Ok(list_data)
}

/// Lomuto partition shared by both quicksorts (`f1`).
fn lomuto(array: &mut [i64], low: i64, high: i64) -> Result<i64, OracleError> {
    let pivot = at(array, high)?;
    let mut i = low - 1;
    for j in low..high {
        if at(array, j)? <= pivot {
            i += 1;
            swap(array, i, j)?;
        }
    }
    swap(array, i + 1, high)?;
    Ok(i + 1)
}

pub fn recursive_quick(mut array: Vec<i64>) -> Res {
    fn go(array: &mut Vec<i64>, mut high: i64, low: i64) -> Result<(), OracleError> {
        if high == array.len() as i64 {
            high -= 1;
        }
        if low < high {
            let pi = lomuto(array, low, high)?;
            go(array, pi - 1, low)?;
            go(array, high, pi + 1)?;
        }
        Ok(())
    }
    let n = array.len() as i64;
    go(&mut array, n, 0)?;
    Ok(array)
}

/// Merge of `arr[l..=m]` and `arr[m+1..=r]` through temporary copies (`f1` of
/// both mergesorts).
fn merge_copies(arr: &mut [i64], l: i64, m: i64, r: i64) -> Result<(), OracleError> {
    let n1 = m - l + 1;
    let n2 = r - m;
    let mut left = vec![0; n1.max(0) as usize];
    let mut right = vec![0; n2.max(0) as usize];
    for i in 0..n1 {
        left[i as usize] = at(arr, l + i)?;
    }
    for j in 0..n2 {
        right[j as usize] = at(arr, m + 1 + j)?;
    }
    let (mut i, mut j, mut k) = (0, 0, l);
    while i < n1 && j < n2 {
        if left[i as usize] <= right[j as usize] {
            set(arr, k, left[i as usize])?;
            i += 1;
        } else {
            set(arr, k, right[j as usize])?;
            j += 1;
        }
        k += 1;
    }
    while i < n1 {
        set(arr, k, left[i as usize])?;
        i += 1;
        k += 1;
    }
    while j < n2 {
        set(arr, k, right[j as usize])?;
        j += 1;
        k += 1;
    }
    Ok(())
}

pub fn recursive_merge(mut arr: Vec<i64>) -> Res {
    fn go(arr: &mut Vec<i64>, mut r: i64, l: i64) -> Result<(), OracleError> {
        if r == arr.len() as i64 {
            r -= 1;
        }
        if l < r {
            let m = l + (r - l).div_euclid(2);
            go(arr, m, l)?;
            go(arr, r, m + 1)?;
            merge_copies(arr, l, m, r)?;
        }
        Ok(())
    }
    let n = arr.len() as i64;
    go(&mut arr, n, 0)?;
    Ok(arr)
}

pub fn recursive_tim(lst: Vec<i64>) -> Res {
    fn merge(left: &[i64], right: &[i64]) -> Vec<i64> {
        if left.is_empty() {
            return right.to_vec();
        }
        if right.is_empty() {
            return left.to_vec();
        }
        if left[0] < right[0] {
            let mut out = vec![left[0]];
            out.extend(merge(&left[1..], right));
            return out;
        }
        let mut out = vec![right[0]];
        out.extend(merge(left, &right[1..]));
        out
    }

    fn binary_search(lst: &[i64], item: i64, start: i64, end: i64) -> Result<i64, OracleError> {
        if start == end {
            return Ok(if at(lst, start)? > item { start } else { start + 1 });
        }
        if start > end {
            return Ok(start);
        }
        let mid = (start + end).div_euclid(2);
        let x = at(lst, mid)?;
        if x < item {
            binary_search(lst, item, mid + 1, end)
        } else if x > item {
            binary_search(lst, item, start, mid - 1)
        } else {
            Ok(mid)
        }
    }

    fn insertion(mut lst: Vec<i64>) -> Result<Vec<i64>, OracleError> {
        let length = lst.len();
        for index in 1..length {
            let value = lst[index];
            let pos = binary_search(&lst, value, 0, index as i64 - 1)? as usize;
            let mut rebuilt = lst[..pos].to_vec();
            rebuilt.push(value);
            rebuilt.extend_from_slice(&lst[pos..index]);
            rebuilt.extend_from_slice(&lst[index + 1..]);
            lst = rebuilt;
        }
        Ok(lst)
    }

    let length = lst.len();
    let first = *lst
        .first()
        .ok_or_else(|| OracleError::Raised("IndexError: list index out of range".into()))?;
    let mut runs = Vec::new();
    let mut new_run = vec![first];
    for i in 1..length {
        if lst[i] < lst[i - 1] {
            runs.push(std::mem::replace(&mut new_run, vec![lst[i]]));
        } else {
            new_run.push(lst[i]);
        }
    }
    runs.push(new_run);
    let mut s_array = Vec::new();
    for run in runs {
        let sorted = insertion(run)?;
        s_array = merge(&s_array, &sorted);
    }
    Ok(s_array)
}

pub fn recursive_heap(mut u_arr: Vec<i64>) -> Res {
    fn sift(u_arr: &mut [i64], index: i64, heap_size: i64) -> Result<(), OracleError> {
        let mut largest = index;
        let left_index = 2 * index + 1;
        let right_index = 2 * index + 2;
        if left_index < heap_size && at(u_arr, left_index)? > at(u_arr, largest)? {
            largest = left_index;
        }
        if right_index < heap_size && at(u_arr, right_index)? > at(u_arr, largest)? {
            largest = right_index;
        }
        if largest != index {
            swap(u_arr, largest, index)?;
            sift(u_arr, largest, heap_size)?;
        }
        Ok(())
    }
    let n = u_arr.len() as i64;
    let mut i = n.div_euclid(2) - 1;
    while i > -1 {
        sift(&mut u_arr, i, n)?;
        i -= 1;
    }
    let mut i = n - 1;
    while i > 0 {
        swap(&mut u_arr, 0, i)?;
        sift(&mut u_arr, 0, i)?;
        i -= 1;
    }
    Ok(u_arr)
}

pub fn iterative_insertion(mut arr: Vec<i64>) -> Res {
    // `enumerate(arr[1:])` iterates over a copy taken before the loop.
    let snapshot: Vec<i64> = arr.iter().skip(1).copied().collect();
    for (j, &val) in snapshot.iter().enumerate() {
        let mut j = j as i64;
        let i = j;
        while j >= 0 && val < at(&arr, j)? {
            let x = at(&arr, j)?;
            set(&mut arr, j + 1, x)?;
            j -= 1;
        }
        if j != i {
            set(&mut arr, j + 1, val)?;
        }
    }
    Ok(arr)
}

/// `for i in reversed(range(length)): for j in range(i): ...`; printed under
/// both "Bubble Sort" and "Selection Sort" in the iterative listing.
pub fn iterative_bubble(mut collection: Vec<i64>) -> Res {
    let length = collection.len();
    for i in (0..length).rev() {
        for j in 0..i {
            if collection[j] > collection[j + 1] {
                collection.swap(j, j + 1);
            }
        }
    }
    Ok(collection)
}

pub fn iterative_adaptive_bubble(mut collection: Vec<i64>) -> Res {
    let length = collection.len();
    for i in (0..length).rev() {
        let mut swapped = false;
        for j in 0..i {
            if collection[j] > collection[j + 1] {
                swapped = true;
                collection.swap(j, j + 1);
            }
        }
        if !swapped {
            break;
        }
    }
    Ok(collection)
}

/// The iterative listing calls `f1` without defining it; the partition of the
/// recursive listing is used.
pub fn iterative_quick(mut arr: Vec<i64>) -> Res {
    let mut h = arr.len() as i64;
    let mut l = 0i64;
    if h == arr.len() as i64 {
        h -= 1;
    }
    let size = h - l + 1;
    let mut stack = vec![0i64; size.max(0) as usize];
    let mut top: i64 = -1;
    top += 1;
    set(&mut stack, top, l)?;
    top += 1;
    set(&mut stack, top, h)?;
    while top >= 0 {
        h = at(&stack, top)?;
        top -= 1;
        l = at(&stack, top)?;
        top -= 1;
        let p = lomuto(&mut arr, l, h)?;
        if p - 1 > l {
            top += 1;
            set(&mut stack, top, l)?;
            top += 1;
            set(&mut stack, top, p - 1)?;
        }
        if p + 1 < h {
            top += 1;
            set(&mut stack, top, p + 1)?;
            top += 1;
            set(&mut stack, top, h)?;
        }
    }
    Ok(arr)
}

pub fn iterative_merge(mut a: Vec<i64>) -> Res {
    let mut width = 1i64;
    let n = a.len() as i64;
    while width < n {
        let mut l = 0i64;
        while l < n {
            let r = (l + (width * 2 - 1)).min(n - 1);
            let m = (l + width - 1).min(n - 1);
            merge_copies(&mut a, l, m, r)?;
            l += width * 2;
        }
        width *= 2;
    }
    Ok(a)
}

pub fn iterative_tim(mut arr: Vec<i64>) -> Res {
    const MIN_RUN: i64 = 32;

    fn insertion(arr: &mut [i64], left: i64, right: i64) -> Result<(), OracleError> {
        for i in left + 1..right + 1 {
            let key_item = at(arr, i)?;
            let mut j = i - 1;
            while j >= left && at(arr, j)? > key_item {
                let x = at(arr, j)?;
                set(arr, j + 1, x)?;
                j -= 1;
            }
            set(arr, j + 1, key_item)?;
        }
        Ok(())
    }

    fn merge(arr: &mut [i64], left: i64, middle: i64, right: i64) -> Result<(), OracleError> {
        if at(arr, middle)? <= at(arr, middle + 1)? {
            return Ok(());
        }
        let left_copy = arr[left as usize..(middle + 1) as usize].to_vec();
        let right_copy = arr[(middle + 1) as usize..(right + 1) as usize].to_vec();
        let (mut li, mut ri) = (0usize, 0usize);
        let mut s_index = left;
        while li < left_copy.len() && ri < right_copy.len() {
            if left_copy[li] <= right_copy[ri] {
                set(arr, s_index, left_copy[li])?;
                li += 1;
            } else {
                set(arr, s_index, right_copy[ri])?;
                ri += 1;
            }
            s_index += 1;
        }
        while li < left_copy.len() {
            set(arr, s_index, left_copy[li])?;
            li += 1;
            s_index += 1;
        }
        while ri < right_copy.len() {
            set(arr, s_index, right_copy[ri])?;
            ri += 1;
            s_index += 1;
        }
        Ok(())
    }

    let n = arr.len() as i64;
    let mut i = 0;
    while i < n {
        insertion(&mut arr, i, (i + MIN_RUN - 1).min(n - 1))?;
        i += MIN_RUN;
    }
    let mut size = MIN_RUN;
    while size < n {
        let mut start = 0;
        while start < n {
            let middle = (start + size - 1).min(n - 1);
            let end = (start + size * 2 - 1).min(n - 1);
            if middle < end {
                merge(&mut arr, start, middle, end)?;
            }
            start += size * 2;
        }
        size *= 2;
    }
    Ok(arr)
}

pub fn iterative_heap(mut arr: Vec<i64>) -> Res {
    // `int((i - 1) / 2)` truncates toward zero, as does `/` on i64.
    let parent = |i: i64| (i - 1) / 2;
    let n = arr.len() as i64;
    for i in 0..n {
        if at(&arr, i)? > at(&arr, parent(i))? {
            let mut j = i;
            while at(&arr, j)? > at(&arr, parent(j))? {
                swap(&mut arr, j, parent(j))?;
                j = parent(j);
            }
        }
    }
    let mut i = n - 1;
    while i > 0 {
        swap(&mut arr, 0, i)?;
        let mut j = 0i64;
        loop {
            let mut index = 2 * j + 1;
            if index < i - 1 && at(&arr, index)? < at(&arr, index + 1)? {
                index += 1;
            }
            if index < i && at(&arr, j)? < at(&arr, index)? {
                swap(&mut arr, j, index)?;
            }
            j = index;
            if index >= i {
                break;
            }
        }
        i -= 1;
    }
    Ok(arr)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Expected outputs captured by running the printed Python sources.
    const INPUT: [i64; 12] = [58, 3, 97, 58, 0, 12, 58, 100, 3, 41, 58, 7];
    const SORTED: [i64; 12] = [0, 3, 3, 7, 12, 41, 58, 58, 58, 58, 97, 100];

    #[test]
    fn every_routine_sorts_a_vector_with_repeats() {
        let routines: [(&str, fn(Vec<i64>) -> Res); 14] = [
            ("rec selection", recursive_min_selection),
            ("rec bubble", recursive_bubble),
            ("rec adaptive", recursive_adaptive_bubble),
            ("rec quick", recursive_quick),
            ("rec merge", recursive_merge),
            ("rec tim", recursive_tim),
            ("rec heap", recursive_heap),
            ("it insertion", iterative_insertion),
            ("it bubble", iterative_bubble),
            ("it adaptive", iterative_adaptive_bubble),
            ("it quick", iterative_quick),
            ("it merge", iterative_merge),
            ("it tim", iterative_tim),
            ("it heap", iterative_heap),
        ];
        for (name, f) in routines {
            assert_eq!(f(INPUT.to_vec()).unwrap(), SORTED, "{name}");
            if name != "it quick" {
                assert_eq!(f(vec![5]).unwrap(), vec![5], "{name}");
            }
            assert_eq!(f(vec![3, 1, 2]).unwrap(), vec![1, 2, 3], "{name}");
        }
    }

    #[test]
    fn empty_input_behaviour_matches_python() {
        assert!(matches!(recursive_tim(vec![]), Err(OracleError::Raised(_))));
        assert!(matches!(iterative_quick(vec![]), Err(OracleError::Raised(_))));
        // the explicit stack has room for a single index when the input has one element
        assert!(matches!(iterative_quick(vec![5]), Err(OracleError::Raised(_))));
        assert_eq!(iterative_bubble(vec![]).unwrap(), Vec::<i64>::new());
        assert_eq!(recursive_heap(vec![]).unwrap(), Vec::<i64>::new());
    }
}
