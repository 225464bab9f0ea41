public class Program {
    static void calc(int[] xs) {
        int y = xs.length;
        for (int u = 0; u < y - 1; u++) {
            boolean swapped = false;
            for (int w = 0; w < y - u - 1; w = w + 1) {
                if (xs[w] > xs[w + 1]) {
                    int t = xs[w + 1];
                    xs[w + 1] = xs[w];
                    xs[w] = t;
                    swapped = true;
                }
            }
            if (!swapped) break;
        }
    }

    public static void main(String[] args) {
        int[] nums = {6, -22, 19, 27};
        calc(nums);
        for (int u = 0; u < nums.length; u++) {
            System.out.print(nums[u] + " ");
        }
        System.out.println();
    }
}
