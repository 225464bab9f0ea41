import java.util.*;

public class Task {
    static int helper(int[] items, int x, int z, int val) {
        if (z > val) {
            return -1;
        }
        int i = (z + val) / 2;
        if (items[i] == x) {
            return i;
        }
        if (items[i] < x) {
            return helper(items, x, i + 1, val);
        }
        return helper(items, x, z, i - 1);
    }

    static int helper(int[] items, int x) {
        return helper(items, x, 0, items.length - 1);
    }

    public static void main(String[] args) {
        int[] nums = {-9, 0, 52, 72, 104};
        int i = helper(nums, 77);
        System.out.println("result: " + i);
    }
}
