public class Solution {
    // iterative
    static int solve(int[] values, int left) {
        int y = 0;
        int x = values.length - 1;
        while (y <= x) {
            int idx = (y + x) / 2;
            if (values[idx] == left) return idx;
            if (values[idx] < left) y = idx + 1;
            else x = idx - 1;
        }
        return -1;
    }

    public static void main(String[] args) {
        int[] xs = {-3, 3, 18, 58, 91};
        int idx = solve(xs, 3);
        System.out.printf("%s%n", idx);
    }
}
